#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fvs/image.hpp"
#include "fvs/preprocess.hpp"
#include "fvs/rng.hpp"

namespace fvs {

using RawDescriptor = std::vector<double>;  // extractor-defined K
using Descriptor = std::vector<double>;     // projected, D

inline constexpr int kBuiltinDescriptorDim = 64;

// Handcrafted 64-dim patch descriptor: per-channel mean/std (6), 16-bin
// grayscale histogram, 18-bin gradient-orientation histogram (orientation
// mod pi, magnitude-weighted), 8-bin hematoxylin-OD histogram, 16-bin
// saturation histogram. Histogram blocks are L1-normalized; means/stds are
// scaled to [0, 1]. Deterministic, so the pipeline is testable without
// pretrained weights.
RawDescriptor extract_builtin(const RgbTile& patch,
                              const StainMatrix& stains = StainMatrix::standard_he());

// 1x1-convolution analog: a trainable linear map K -> D.
struct ProjectionParams {
  int in_dim = kBuiltinDescriptorDim;
  int out_dim = 10;
  std::vector<double> W;  // in_dim x out_dim, row-major (row = input index)
  std::vector<double> b;  // out_dim
  bool trainable = true;

  // W uniform in +-sqrt(1/K), b = 0.
  static ProjectionParams init(int in_dim, int out_dim, Rng rng);
  void validate() const;
};

// values = W^T raw + b
Descriptor project(const RawDescriptor& raw, const ProjectionParams& p);

// Accumulates dL/dW and dL/db for one patch; optionally returns dL/draw.
void project_backward(const RawDescriptor& raw, const ProjectionParams& p,
                      std::span<const double> grad_out,
                      std::span<double> grad_W, std::span<double> grad_b);

// Per-channel standardization over the slide's descriptor set:
// (x - mean) / sqrt(var + eps), population variance. Channels with zero
// variance map to all-zeros.
std::vector<Descriptor> instance_normalize(const std::vector<Descriptor>& xs,
                                           double eps = 1e-5);

// dL/dx given the forward inputs and dL/dy.
std::vector<Descriptor> instance_normalize_backward(
    const std::vector<Descriptor>& xs, const std::vector<Descriptor>& grad_y,
    double eps = 1e-5);

// External descriptors: CSV with header slide_id,patch_index,v0..v{K-1}.
struct DescriptorSet {
  std::string slide_id;
  std::vector<RawDescriptor> raws;  // ordered by patch_index
};

std::vector<DescriptorSet> import_descriptors(
    const std::filesystem::path& csv_path);
void export_descriptors(const std::filesystem::path& csv_path,
                        std::span<const DescriptorSet> sets);

}  // namespace fvs
