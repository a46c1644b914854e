#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ssdm/labelmap.hpp"
#include "ssdm/tensor.hpp"

namespace ssdm {

// "SST1" tensor container: magic `S S T 1`, one byte dtype code, one byte
// ndim, ndim little-endian u32 dims, then the raw little-endian row-major
// payload. Round-trips are bit exact.
enum class Sst1Dtype : uint8_t { f32 = 0, f64 = 1, u8 = 2, i32 = 3 };

size_t sst1_dtype_size(Sst1Dtype dtype);

struct Sst1Blob {
  Sst1Dtype dtype;
  Shape shape;
  std::vector<uint8_t> payload;  // little-endian element bytes

  int64_t numel() const { return shape_numel(shape); }
};

void write_sst1(const std::filesystem::path& path, const Sst1Blob& blob);
Sst1Blob read_sst1(const std::filesystem::path& path);

// Typed helpers. Loading requires the stored dtype to match.
void save_tensor(const std::filesystem::path& path, const Tensor<float>& t);
void save_tensor(const std::filesystem::path& path, const Tensor<double>& t);
void save_labels(const std::filesystem::path& path, const LabelMap& labels);

Tensor<float> load_tensor_f32(const std::filesystem::path& path);
Tensor<double> load_tensor_f64(const std::filesystem::path& path);
LabelMap load_labels(const std::filesystem::path& path);

}  // namespace ssdm
