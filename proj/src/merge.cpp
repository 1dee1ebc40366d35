#include "nonins/merge.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "nonins/error.hpp"

namespace nonins::merge {

std::size_t dtype_size(DType dtype) {
    return dtype == DType::f32 ? 4 : 2;
}

std::string_view to_string(DType dtype) {
    return dtype == DType::f32 ? "F32" : "F16";
}

DType parse_dtype(std::string_view name) {
    if (name == "F32") return DType::f32;
    if (name == "F16") return DType::f16;
    throw Error(ErrorKind::parse, "unsupported tensor dtype: " + std::string(name));
}

float half_to_float(std::uint16_t h) {
    const std::uint32_t sign = static_cast<std::uint32_t>(h >> 15) << 31;
    const std::uint32_t exp = (h >> 10) & 0x1F;
    const std::uint32_t mant = h & 0x3FF;
    if (exp == 0) {
        const float magnitude = std::ldexp(static_cast<float>(mant), -24);
        return sign ? -magnitude : magnitude;
    }
    if (exp == 31) return std::bit_cast<float>(sign | 0x7F800000u | (mant << 13));
    return std::bit_cast<float>(sign | ((exp - 15 + 127) << 23) | (mant << 13));
}

std::uint16_t float_to_half(float f) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    const auto sign = static_cast<std::uint16_t>((bits >> 16) & 0x8000);
    const std::uint32_t exp = (bits >> 23) & 0xFF;
    const std::uint32_t mant = bits & 0x7FFFFF;

    if (exp == 0xFF) {
        if (mant == 0) return sign | 0x7C00;
        return static_cast<std::uint16_t>(sign | 0x7C00 | 0x200 | (mant >> 13));
    }
    if (exp == 0) return sign;  // fp32 subnormals are far below the fp16 range

    const int e = static_cast<int>(exp) - 127;
    if (e > 15) return sign | 0x7C00;

    if (e >= -14) {
        std::uint32_t half_exp = static_cast<std::uint32_t>(e + 15);
        std::uint32_t m10 = mant >> 13;
        const std::uint32_t rest = mant & 0x1FFF;
        if (rest > 0x1000 || (rest == 0x1000 && (m10 & 1))) ++m10;
        if (m10 == 0x400) {
            m10 = 0;
            ++half_exp;
        }
        if (half_exp >= 31) return sign | 0x7C00;
        return static_cast<std::uint16_t>(sign | (half_exp << 10) | m10);
    }

    // Subnormal result, in units of 2^-24.
    const int shift = -e - 1;
    if (shift > 24) return sign;
    const std::uint32_t full = mant | 0x800000;
    std::uint32_t result = full >> shift;
    const std::uint32_t rest = full & ((1u << shift) - 1);
    const std::uint32_t halfway = 1u << (shift - 1);
    if (rest > halfway || (rest == halfway && (result & 1))) ++result;
    return static_cast<std::uint16_t>(sign | result);
}

namespace {

void put_u32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

}  // namespace

Tensor Tensor::from_floats(DType dtype, std::vector<std::size_t> shape, std::span<const float> values) {
    if (product(shape) != values.size()) {
        throw Error(ErrorKind::shape_mismatch, "value count does not match tensor shape");
    }
    Tensor t;
    t.dtype = dtype;
    t.shape = std::move(shape);
    t.data.resize(values.size() * dtype_size(dtype));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (dtype == DType::f32) {
            put_u32(&t.data[4 * i], std::bit_cast<std::uint32_t>(values[i]));
        } else {
            const std::uint16_t h = float_to_half(values[i]);
            t.data[2 * i] = static_cast<std::uint8_t>(h & 0xFF);
            t.data[2 * i + 1] = static_cast<std::uint8_t>(h >> 8);
        }
    }
    return t;
}

std::size_t Tensor::numel() const {
    return product(shape);
}

std::vector<float> Tensor::to_floats() const {
    const std::size_t n = numel();
    if (data.size() != n * dtype_size(dtype)) throw Error(ErrorKind::shape_mismatch, "tensor byte length mismatch");
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (dtype == DType::f32) {
            out[i] = std::bit_cast<float>(get_u32(&data[4 * i]));
        } else {
            out[i] = half_to_float(static_cast<std::uint16_t>(data[2 * i] | (data[2 * i + 1] << 8)));
        }
    }
    return out;
}

void TensorArchive::insert(std::string name, Tensor tensor) {
    if (name.empty() || name == "__metadata__") throw Error(ErrorKind::invalid_argument, "invalid tensor name");
    if (tensor.data.size() != tensor.numel() * dtype_size(tensor.dtype)) {
        throw Error(ErrorKind::shape_mismatch, "tensor " + name + ": byte length does not match shape");
    }
    if (!tensors_.emplace(std::move(name), std::move(tensor)).second) {
        throw Error(ErrorKind::invalid_argument, "duplicate tensor name");
    }
}

const Tensor& TensorArchive::at(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw Error(ErrorKind::missing_input, "no tensor named " + name);
    return it->second;
}

std::string serialize(const TensorArchive& archive) {
    json header = json::object();
    std::size_t offset = 0;
    for (const auto& [name, t] : archive.tensors()) {
        header[name] = {{"dtype", to_string(t.dtype)}, {"shape", t.shape}, {"data_offsets", {offset, offset + t.data.size()}}};
        offset += t.data.size();
    }
    if (!archive.metadata().empty()) header["__metadata__"] = archive.metadata();

    std::string head = header.dump();
    head.append((8 - head.size() % 8) % 8, ' ');

    std::string out(8, '\0');
    const std::uint64_t n = head.size();
    for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((n >> (8 * i)) & 0xFF);
    out += head;
    out.reserve(out.size() + offset);
    for (const auto& [name, t] : archive.tensors()) {
        out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size());
    }
    return out;
}

TensorArchive deserialize(std::string_view bytes) {
    if (bytes.size() < 8) throw Error(ErrorKind::parse, "tensor archive shorter than its length prefix");
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    if (n > bytes.size() - 8) throw Error(ErrorKind::parse, "tensor archive header length exceeds file size");

    json header;
    try {
        header = json::parse(bytes.substr(8, n));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("tensor archive header: ") + e.what());
    }
    if (!header.is_object()) throw Error(ErrorKind::parse, "tensor archive header is not an object");

    const std::string_view data = bytes.substr(8 + n);
    TensorArchive archive;
    for (const auto& [name, entry] : header.items()) {
        if (name == "__metadata__") {
            for (const auto& [k, v] : entry.items()) archive.metadata()[k] = v.get<std::string>();
            continue;
        }
        try {
            Tensor t;
            t.dtype = parse_dtype(entry.at("dtype").get<std::string>());
            t.shape = entry.at("shape").get<std::vector<std::size_t>>();
            const auto offsets = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
            if (offsets.size() != 2 || offsets[0] > offsets[1] || offsets[1] > data.size()) {
                throw Error(ErrorKind::parse, "tensor " + name + ": data offsets out of range");
            }
            if (offsets[1] - offsets[0] != t.numel() * dtype_size(t.dtype)) {
                throw Error(ErrorKind::parse, "tensor " + name + ": byte length does not match shape");
            }
            const auto* p = reinterpret_cast<const std::uint8_t*>(data.data()) + offsets[0];
            t.data.assign(p, p + (offsets[1] - offsets[0]));
            archive.insert(name, std::move(t));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::parse, "tensor " + name + ": " + e.what());
        }
    }
    return archive;
}

TensorArchive read_archive(const fs::path& path) {
    return deserialize(read_file(path));
}

void write_archive(const fs::path& path, const TensorArchive& archive) {
    write_file_atomic(path, serialize(archive));
}

float AdapterPair::scale() const {
    return static_cast<float>(alpha / static_cast<double>(rank));
}

void AdapterPair::validate() const {
    if (rank == 0) throw Error(ErrorKind::invalid_argument, "adapter " + target + ": rank must be positive");
    const double s = alpha / static_cast<double>(rank);
    if (!std::isfinite(s) || s <= 0.0) {
        throw Error(ErrorKind::invalid_argument, "adapter " + target + ": alpha / r must be finite and positive");
    }
    if (a.size() != rank * in) throw Error(ErrorKind::shape_mismatch, "adapter " + target + ": A is not r x in");
    if (b.size() != out * rank) throw Error(ErrorKind::shape_mismatch, "adapter " + target + ": B is not out x r");
}

std::vector<AdapterPair> read_adapters(const fs::path& archive_path, const fs::path& descriptor_path) {
    const TensorArchive archive = read_archive(archive_path);
    const json desc = read_json_file(descriptor_path);
    const auto rank = desc.at("r").get<std::size_t>();
    const auto alpha = desc.at("alpha").get<double>();

    std::vector<AdapterPair> adapters;
    for (const auto& target : desc.at("targets")) {
        AdapterPair p;
        p.target = target.get<std::string>();
        const Tensor& a = archive.at(p.target + ".lora_A");
        const Tensor& b = archive.at(p.target + ".lora_B");
        if (a.shape.size() != 2 || b.shape.size() != 2 || a.shape[0] != rank || b.shape[1] != rank) {
            throw Error(ErrorKind::shape_mismatch, "adapter " + p.target + ": factor shapes disagree with r");
        }
        p.rank = rank;
        p.alpha = alpha;
        p.in = a.shape[1];
        p.out = b.shape[0];
        p.a = a.to_floats();
        p.b = b.to_floats();
        p.validate();
        adapters.push_back(std::move(p));
    }
    return adapters;
}

void write_adapters(const fs::path& archive_path, const fs::path& descriptor_path,
                    const std::vector<AdapterPair>& adapters) {
    if (adapters.empty()) throw Error(ErrorKind::invalid_argument, "no adapters to write");
    TensorArchive archive;
    json targets = json::array();
    for (const auto& p : adapters) {
        p.validate();
        if (p.rank != adapters.front().rank || p.alpha != adapters.front().alpha) {
            throw Error(ErrorKind::invalid_argument, "adapters in one file must share r and alpha");
        }
        archive.insert(p.target + ".lora_A", Tensor::from_floats(DType::f32, {p.rank, p.in}, p.a));
        archive.insert(p.target + ".lora_B", Tensor::from_floats(DType::f32, {p.out, p.rank}, p.b));
        targets.push_back(p.target);
    }
    write_archive(archive_path, archive);
    write_json_file(descriptor_path, {{"r", adapters.front().rank}, {"alpha", adapters.front().alpha}, {"targets", targets}});
}

namespace {

void require_finite(std::span<const float> values, const std::string& what) {
    for (float v : values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::non_finite, what + " contains non-finite values");
    }
}

TensorArchive apply_adapters(const TensorArchive& backbone, const std::vector<AdapterPair>& adapters) {
    std::set<std::string> targets;
    for (const auto& p : adapters) {
        p.validate();
        if (!targets.insert(p.target).second) {
            throw Error(ErrorKind::invalid_argument, "more than one adapter targets " + p.target);
        }
        if (!backbone.contains(p.target)) throw Error(ErrorKind::missing_input, "adapter target missing: " + p.target);
        const Tensor& w = backbone.at(p.target);
        if (w.shape.size() != 2 || w.shape[0] != p.out || w.shape[1] != p.in) {
            throw Error(ErrorKind::shape_mismatch, "adapter " + p.target + " does not match the target's out x in shape");
        }
    }

    TensorArchive merged;
    merged.metadata() = backbone.metadata();
    for (const auto& [name, tensor] : backbone.tensors()) {
        if (!targets.count(name)) merged.insert(name, tensor);
    }

    for (const auto& p : adapters) {
        const Tensor& w = backbone.at(p.target);
        std::vector<float> values = w.to_floats();
        require_finite(values, "tensor " + p.target);
        require_finite(p.a, "adapter " + p.target + " A");
        require_finite(p.b, "adapter " + p.target + " B");

        const float scale = p.scale();
        std::vector<float> row(p.in);
        for (std::size_t i = 0; i < p.out; ++i) {
            std::fill(row.begin(), row.end(), 0.0f);
            for (std::size_t k = 0; k < p.rank; ++k) {
                const float bik = p.b[i * p.rank + k];
                const float* a_row = &p.a[k * p.in];
                for (std::size_t j = 0; j < p.in; ++j) row[j] += bik * a_row[j];
            }
            float* w_row = &values[i * p.in];
            for (std::size_t j = 0; j < p.in; ++j) w_row[j] += scale * row[j];
        }
        require_finite(values, "merged tensor " + p.target);
        merged.insert(p.target, Tensor::from_floats(w.dtype, w.shape, values));
    }
    return merged;
}

}  // namespace

TensorArchive merge_lora(const TensorArchive& backbone, const std::vector<AdapterPair>& adapters) {
    return apply_adapters(backbone, adapters);
}

TensorArchive merge_lora_base(const TensorArchive& instruct, const std::vector<AdapterPair>& adapters_trained_on_base) {
    return apply_adapters(instruct, adapters_trained_on_base);
}

TensorArchive delta(const TensorArchive& merged, const TensorArchive& reference) {
    if (merged.size() != reference.size()) throw Error(ErrorKind::shape_mismatch, "archives hold different tensor sets");
    TensorArchive out;
    for (const auto& [name, m] : merged.tensors()) {
        if (!reference.contains(name)) throw Error(ErrorKind::shape_mismatch, "reference lacks tensor " + name);
        const Tensor& r = reference.at(name);
        if (m.shape != r.shape) throw Error(ErrorKind::shape_mismatch, "shape mismatch for tensor " + name);
        std::vector<float> a = m.to_floats();
        const std::vector<float> b = r.to_floats();
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
        out.insert(name, Tensor::from_floats(DType::f32, m.shape, a));
    }
    return out;
}

}  // namespace nonins::merge
