#pragma once

#include <stdexcept>
#include <string>

namespace fvs {

// Error conditions surfaced by the library. Grouped by the process exit
// code the CLI maps them to: 2 = I/O, 3 = bad config/input content,
// 4 = runtime/numeric contract violation.
enum class Errc {
  // exit 2
  file_not_found,
  missing_tile,
  write_failed,
  // exit 3
  malformed_manifest,
  malformed_config,
  malformed_row,
  inconsistent_dimension,
  // exit 4
  out_of_bounds,
  shape_mismatch,
  length_mismatch,
  empty_candidate_set,
  empty_descriptor_set,
  insufficient_data,
  insufficient_centers,
  single_class_dataset,
  single_class_labels,
  non_finite_loss,
};

int exit_code(Errc c) noexcept;
const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace fvs
