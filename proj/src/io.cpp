#include "vecq/io.hpp"

#include "vecq/error.hpp"
#include "vecq/quantizer.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

namespace vecq {

namespace {

constexpr std::uint8_t kMagic[4] = {'V', 'Q', 'T', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[at + i]} << (8 * i);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[at + i]} << (8 * i);
    return v;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in bounded chunks.
    constexpr std::size_t kChunk = 1u << 30;
    for (std::size_t at = 0; at < bytes.size(); at += kChunk) {
        const std::size_t n = std::min(kChunk, bytes.size() - at);
        crc = ::crc32(crc, bytes.data() + at, static_cast<uInt>(n));
    }
    return static_cast<std::uint32_t>(crc);
}

std::size_t dtype_size(DType d) { return d == DType::F32 ? 4 : 8; }

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype) {
    if (t.rank() > std::numeric_limits<std::uint8_t>::max()) {
        fail(ErrorCode::InvalidArgument, "tensor rank exceeds 255");
    }
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(static_cast<std::uint8_t>(dtype));
    out.push_back(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t extent : t.shape()) {
        if (extent > std::numeric_limits<std::uint32_t>::max()) {
            fail(ErrorCode::InvalidArgument, "tensor extent exceeds u32");
        }
        put_u32(out, static_cast<std::uint32_t>(extent));
    }
    out.reserve(out.size() + t.size() * dtype_size(dtype) + 4);
    for (double v : t.data()) {
        if (dtype == DType::F32) {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        } else {
            put_u64(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    put_u32(out, crc32_of(out));
    return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) fail(ErrorCode::TruncatedPayload, "truncated payload: no header");
    if (!std::equal(kMagic, kMagic + 4, bytes.begin())) fail(ErrorCode::BadMagic, "bad magic");
    if (bytes.size() < 6) fail(ErrorCode::TruncatedPayload, "truncated payload: short header");
    const std::uint8_t raw_dtype = bytes[4];
    if (raw_dtype > 1) fail(ErrorCode::UnsupportedDtype, "unsupported dtype " + std::to_string(raw_dtype));
    const auto dtype = static_cast<DType>(raw_dtype);
    const std::size_t rank = bytes[5];
    const std::size_t header = 6 + 4 * rank;
    if (bytes.size() < header) fail(ErrorCode::TruncatedPayload, "truncated payload: short shape");

    Shape shape(rank);
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        shape[i] = get_u32(bytes, 6 + 4 * i);
        count *= shape[i];
    }
    const std::size_t width = dtype_size(dtype);
    const std::size_t expected = header + count * width + 4;
    if (bytes.size() < expected) fail(ErrorCode::TruncatedPayload, "truncated payload");
    if (bytes.size() > expected) fail(ErrorCode::CrcMismatch, "unexpected trailing bytes");

    const std::uint32_t stored = get_u32(bytes, expected - 4);
    if (crc32_of(bytes.first(expected - 4)) != stored) fail(ErrorCode::CrcMismatch, "crc mismatch");

    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t at = header + i * width;
        data[i] = dtype == DType::F32 ? static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)))
                                      : std::bit_cast<double>(get_u64(bytes, at));
    }
    return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype) {
    const auto bytes = encode_tensor(t, dtype);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                          std::istreambuf_iterator<char>()};
    return decode_tensor(bytes);
}

std::uint64_t quantized_bytes(std::size_t count, int bits) {
    const std::uint64_t code_bits = static_cast<std::uint64_t>(count) * static_cast<std::uint64_t>(bits);
    return (code_bits + 7) / 8 + 8;
}

LayerRecord make_layer_record(std::string name, const QuantResult& result,
                              std::size_t source_element_bytes) {
    LayerRecord r;
    r.name = std::move(name);
    r.k = result.codes.bits;
    r.lambda = result.lambda;
    r.alpha = result.alpha;
    r.J_o = result.loss_orientation;
    r.J_m = result.loss_modulus;
    r.J_v = result.loss_vector;
    r.J_l2 = result.loss_l2;
    r.original_bytes = result.codes.size() * source_element_bytes;
    r.quantized_bytes = quantized_bytes(result.codes.size(), result.codes.bits);
    r.compression_ratio =
        static_cast<double>(r.original_bytes) / static_cast<double>(r.quantized_bytes);
    return r;
}

namespace {

double significant6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

}  // namespace

std::string report_to_json(const QuantReport& report) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& r : report.layers) {
        layers.push_back({{"name", r.name},
                          {"k", r.k},
                          {"lambda", significant6(r.lambda)},
                          {"alpha", significant6(r.alpha)},
                          {"J_o", significant6(r.J_o)},
                          {"J_m", significant6(r.J_m)},
                          {"J_v", significant6(r.J_v)},
                          {"J_l2", significant6(r.J_l2)},
                          {"original_bytes", r.original_bytes},
                          {"quantized_bytes", r.quantized_bytes},
                          {"compression_ratio", significant6(r.compression_ratio)}});
    }
    return nlohmann::json{{"layers", layers}}.dump();
}

QuantReport report_from_json(const std::string& text) {
    QuantReport report;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& l : j.at("layers")) {
            LayerRecord r;
            r.name = l.at("name").get<std::string>();
            r.k = l.at("k").get<int>();
            r.lambda = l.at("lambda").get<double>();
            r.alpha = l.at("alpha").get<double>();
            r.J_o = l.at("J_o").get<double>();
            r.J_m = l.at("J_m").get<double>();
            r.J_v = l.at("J_v").get<double>();
            r.J_l2 = l.at("J_l2").get<double>();
            r.original_bytes = l.at("original_bytes").get<std::uint64_t>();
            r.quantized_bytes = l.at("quantized_bytes").get<std::uint64_t>();
            r.compression_ratio = l.at("compression_ratio").get<double>();
            report.layers.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedJson, std::string("report: ") + e.what());
    }
    return report;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

void write_report(const std::filesystem::path& path, const QuantReport& report) {
    write_text_file(path, report_to_json(report));
}

QuantReport read_report(const std::filesystem::path& path) {
    return report_from_json(read_text_file(path));
}

}  // namespace vecq
