#include "fvs/error.hpp"

namespace fvs {

int exit_code(Errc c) noexcept {
  switch (c) {
    case Errc::file_not_found:
    case Errc::missing_tile:
    case Errc::write_failed:
      return 2;
    case Errc::malformed_manifest:
    case Errc::malformed_config:
    case Errc::malformed_row:
    case Errc::inconsistent_dimension:
      return 3;
    default:
      return 4;
  }
}

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::file_not_found: return "FileNotFound";
    case Errc::missing_tile: return "MissingTile";
    case Errc::write_failed: return "WriteFailed";
    case Errc::malformed_manifest: return "MalformedManifest";
    case Errc::malformed_config: return "MalformedConfig";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::inconsistent_dimension: return "InconsistentDimension";
    case Errc::out_of_bounds: return "OutOfBounds";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_candidate_set: return "EmptyCandidateSet";
    case Errc::empty_descriptor_set: return "EmptyDescriptorSet";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::insufficient_centers: return "InsufficientCenters";
    case Errc::single_class_dataset: return "SingleClassDataset";
    case Errc::single_class_labels: return "SingleClassLabels";
    case Errc::non_finite_loss: return "NonFiniteLoss";
  }
  return "UnknownError";
}

}  // namespace fvs
