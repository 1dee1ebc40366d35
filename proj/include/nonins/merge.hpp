#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nonins/jsonl.hpp"

namespace nonins::merge {

enum class DType { f32, f16 };

std::size_t dtype_size(DType dtype);
/// Archive header spelling: "F32" / "F16".
std::string_view to_string(DType dtype);
DType parse_dtype(std::string_view name);

/// IEEE binary16 conversions; float_to_half rounds to nearest even.
float half_to_float(std::uint16_t h);
std::uint16_t float_to_half(float f);

/// Row-major tensor holding raw little-endian bytes in its storage dtype.
struct Tensor {
    DType dtype = DType::f32;
    std::vector<std::size_t> shape;
    std::vector<std::uint8_t> data;

    static Tensor from_floats(DType dtype, std::vector<std::size_t> shape, std::span<const float> values);

    std::size_t numel() const;
    std::vector<float> to_floats() const;

    bool operator==(const Tensor&) const = default;
};

/// Named tensors plus free-form string metadata.
class TensorArchive {
public:
    void insert(std::string name, Tensor tensor);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
    std::size_t size() const { return tensors_.size(); }

    const std::map<std::string, Tensor>& tensors() const { return tensors_; }
    std::map<std::string, std::string>& metadata() { return metadata_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

    bool operator==(const TensorArchive&) const = default;

private:
    std::map<std::string, Tensor> tensors_;
    std::map<std::string, std::string> metadata_;
};

/// Single-file layout: u64 little-endian header length N, N bytes of JSON
/// header (name -> {dtype, shape, data_offsets}), then the tensor bytes.
/// Offsets are relative to the first byte after the header. Tensors are
/// written in name order and the header is space-padded to 8 bytes.
std::string serialize(const TensorArchive& archive);
TensorArchive deserialize(std::string_view bytes);

TensorArchive read_archive(const fs::path& path);
void write_archive(const fs::path& path, const TensorArchive& archive);

/// Low-rank factors for one backbone tensor of shape out x in:
/// a is rank x in, b is out x rank, both row-major fp32.
struct AdapterPair {
    std::string target;
    std::size_t rank = 0;
    std::size_t in = 0;
    std::size_t out = 0;
    double alpha = 0.0;
    std::vector<float> a;
    std::vector<float> b;

    /// alpha / rank
    float scale() const;
    void validate() const;
};

/// Adapter archives store `{target}.lora_A` and `{target}.lora_B` tensors;
/// a sidecar JSON descriptor carries {r, alpha, targets}.
std::vector<AdapterPair> read_adapters(const fs::path& archive_path, const fs::path& descriptor_path);
void write_adapters(const fs::path& archive_path, const fs::path& descriptor_path,
                    const std::vector<AdapterPair>& adapters);

/// W + (alpha / r) * B * A for each adapted tensor, accumulated in fp32 and
/// cast back to the tensor's dtype. Other tensors are copied unchanged.
TensorArchive merge_lora(const TensorArchive& backbone, const std::vector<AdapterPair>& adapters);

/// Adds adapters trained on a foundation model to the matching Instruct/chat
/// weights. The arithmetic is that of merge_lora; only the backbone differs.
TensorArchive merge_lora_base(const TensorArchive& instruct, const std::vector<AdapterPair>& adapters_trained_on_base);

/// Elementwise merged - reference in fp32. Names and shapes must match.
TensorArchive delta(const TensorArchive& merged, const TensorArchive& reference);

}  // namespace nonins::merge
