#include "ssdm/sst1.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace ssdm {

static_assert(std::endian::native == std::endian::little,
              "SST1 I/O assumes a little-endian host");

namespace {
constexpr char kMagic[4] = {'S', 'S', 'T', '1'};
}

size_t sst1_dtype_size(Sst1Dtype dtype) {
  switch (dtype) {
    case Sst1Dtype::f32: return 4;
    case Sst1Dtype::f64: return 8;
    case Sst1Dtype::u8: return 1;
    case Sst1Dtype::i32: return 4;
  }
  throw IoError("unknown SST1 dtype code");
}

void write_sst1(const std::filesystem::path& path, const Sst1Blob& blob) {
  if (blob.shape.size() > 255) throw IoError("SST1: too many dimensions");
  const size_t expected = static_cast<size_t>(blob.numel()) * sst1_dtype_size(blob.dtype);
  if (blob.payload.size() != expected) {
    throw IoError("SST1: payload size " + std::to_string(blob.payload.size()) +
                  " does not match shape " + format_shape(blob.shape));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  const uint8_t dtype = static_cast<uint8_t>(blob.dtype);
  const uint8_t ndim = static_cast<uint8_t>(blob.shape.size());
  out.write(reinterpret_cast<const char*>(&dtype), 1);
  out.write(reinterpret_cast<const char*>(&ndim), 1);
  for (int64_t d : blob.shape) {
    if (d < 0 || d > UINT32_MAX) throw IoError("SST1: dimension out of u32 range");
    const uint32_t dim = static_cast<uint32_t>(d);
    out.write(reinterpret_cast<const char*>(&dim), 4);
  }
  out.write(reinterpret_cast<const char*>(blob.payload.data()),
            static_cast<std::streamsize>(blob.payload.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Sst1Blob read_sst1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not an SST1 file: " + path.string());
  }
  uint8_t dtype_code = 0, ndim = 0;
  in.read(reinterpret_cast<char*>(&dtype_code), 1);
  in.read(reinterpret_cast<char*>(&ndim), 1);
  if (!in || dtype_code > 3) throw IoError("bad SST1 header: " + path.string());
  Sst1Blob blob;
  blob.dtype = static_cast<Sst1Dtype>(dtype_code);
  blob.shape.resize(ndim);
  for (auto& d : blob.shape) {
    uint32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), 4);
    d = dim;
  }
  if (!in) throw IoError("truncated SST1 header: " + path.string());
  const size_t bytes = static_cast<size_t>(blob.numel()) * sst1_dtype_size(blob.dtype);
  blob.payload.resize(bytes);
  in.read(reinterpret_cast<char*>(blob.payload.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("truncated SST1 payload: " + path.string());
  return blob;
}

namespace {

template <typename T>
void save_tensor_impl(const std::filesystem::path& path, const Tensor<T>& t,
                      Sst1Dtype dtype) {
  Sst1Blob blob;
  blob.dtype = dtype;
  blob.shape = t.shape();
  blob.payload.resize(static_cast<size_t>(t.numel()) * sizeof(T));
  std::memcpy(blob.payload.data(), t.values().data(), blob.payload.size());
  write_sst1(path, blob);
}

template <typename T>
Tensor<T> load_tensor_impl(const std::filesystem::path& path, Sst1Dtype want) {
  Sst1Blob blob = read_sst1(path);
  if (blob.dtype != want) {
    throw IoError("SST1 dtype mismatch in " + path.string());
  }
  std::vector<T> data(static_cast<size_t>(blob.numel()));
  std::memcpy(data.data(), blob.payload.data(), blob.payload.size());
  return Tensor<T>::from_data(blob.shape, std::move(data));
}

}  // namespace

void save_tensor(const std::filesystem::path& path, const Tensor<float>& t) {
  save_tensor_impl(path, t, Sst1Dtype::f32);
}

void save_tensor(const std::filesystem::path& path, const Tensor<double>& t) {
  save_tensor_impl(path, t, Sst1Dtype::f64);
}

void save_labels(const std::filesystem::path& path, const LabelMap& labels) {
  Sst1Blob blob;
  blob.dtype = Sst1Dtype::u8;
  blob.shape = {labels.height, labels.width};
  blob.payload = labels.values;
  write_sst1(path, blob);
}

Tensor<float> load_tensor_f32(const std::filesystem::path& path) {
  return load_tensor_impl<float>(path, Sst1Dtype::f32);
}

Tensor<double> load_tensor_f64(const std::filesystem::path& path) {
  return load_tensor_impl<double>(path, Sst1Dtype::f64);
}

LabelMap load_labels(const std::filesystem::path& path) {
  Sst1Blob blob = read_sst1(path);
  if (blob.dtype != Sst1Dtype::u8 || blob.shape.size() != 2) {
    throw IoError("expected a u8 HxW label map in " + path.string());
  }
  LabelMap labels;
  labels.height = blob.shape[0];
  labels.width = blob.shape[1];
  labels.values = std::move(blob.payload);
  return labels;
}

}  // namespace ssdm
