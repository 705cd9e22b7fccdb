#pragma once

#include "vecq/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vecq {

// On-disk layout (all little-endian):
//   "VQT1" | dtype u8 (0 = f32, 1 = f64) | rank u8 | rank x u32 extents |
//   payload | crc32(header + payload) u32
enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype = DType::F32);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype = DType::F32);
Tensor read_tensor(const std::filesystem::path& path);

struct LayerRecord {
    std::string name;
    int k = 0;
    double lambda = 0.0;
    double alpha = 0.0;
    double J_o = 0.0;
    double J_m = 0.0;
    double J_v = 0.0;
    double J_l2 = 0.0;
    std::uint64_t original_bytes = 0;
    std::uint64_t quantized_bytes = 0;
    double compression_ratio = 0.0;
};

struct QuantReport {
    std::vector<LayerRecord> layers;
};

// Packed k-bit codes plus 32-bit alpha and lambda.
std::uint64_t quantized_bytes(std::size_t count, int bits);

struct QuantResult;
LayerRecord make_layer_record(std::string name, const QuantResult& result,
                              std::size_t source_element_bytes = 4);

// Canonical JSON: sorted keys, floats rounded to 6 significant digits.
std::string report_to_json(const QuantReport& report);
QuantReport report_from_json(const std::string& text);

void write_report(const std::filesystem::path& path, const QuantReport& report);
QuantReport read_report(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace vecq
