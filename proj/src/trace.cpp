// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#include "vtc/trace.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "vtc/errors.hpp"

namespace vtc {

namespace {

constexpr double kValueLow = -1e-6;
constexpr double kValueHigh = 1.0 + 1e-6;
constexpr double kRowSumHigh = 1.0 + 1e-5;
constexpr std::uint64_t kMaxHeaderBytes = 1 << 20;

constexpr const char* kOrderEncoder = "layer,head,visual";
constexpr const char* kOrderDecoder = "layer,head,output,visual";

static_assert(std::endian::native == std::endian::little,
              "trace i/o assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.write(buf, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.write(buf, 8);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
    char buf[4];
    in.read(buf, 4);
    if (in.gcount() != 4) return false;
    std::memcpy(&v, buf, 4);
    return true;
}

bool get_u64(std::istream& in, std::uint64_t& v) {
    char buf[8];
    in.read(buf, 8);
    if (in.gcount() != 8) return false;
    std::memcpy(&v, buf, 8);
    return true;
}

std::uint32_t header_u32(const nlohmann::json& header, const char* key) {
    if (!header.contains(key) || !header[key].is_number_unsigned()) {
        throw FormatError(std::string("trace header: missing or invalid \"") + key + "\"");
    }
    const std::uint64_t v = header[key].get<std::uint64_t>();
    if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError(std::string("trace header: \"") + key + "\" out of range");
    }
    return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string to_string(TraceRole role) {
    return role == TraceRole::Encoder ? "encoder" : "decoder";
}

TraceRole role_from_string(const std::string& s) {
    if (s == "encoder") return TraceRole::Encoder;
    if (s == "decoder") return TraceRole::Decoder;
    throw FormatError("trace header: unknown role \"" + s + "\"");
}

std::size_t AttentionTrace::expected_value_count() const {
    std::size_t rows = static_cast<std::size_t>(num_layers) * num_heads;
    if (role == TraceRole::Decoder) {
        rows *= num_output_tokens;
    }
    return rows * num_visual_tokens;
}

std::span<const float> AttentionTrace::encoder_row(std::uint32_t layer, std::uint32_t head) const {
    if (role != TraceRole::Encoder) {
        throw RoleError("encoder_row: trace role is decoder");
    }
    if (layer >= num_layers) {
        throw InvalidLayer("encoder_row: layer out of range");
    }
    if (head >= num_heads) {
        throw InvalidInput("encoder_row: head out of range");
    }
    const std::size_t offset =
        (static_cast<std::size_t>(layer) * num_heads + head) * num_visual_tokens;
    return {values.data() + offset, num_visual_tokens};
}

std::span<const float> AttentionTrace::decoder_row(std::uint32_t layer, std::uint32_t head,
                                                   std::uint32_t output_token) const {
    if (role != TraceRole::Decoder) {
        throw RoleError("decoder_row: trace role is encoder");
    }
    if (layer >= num_layers) {
        throw InvalidLayer("decoder_row: layer out of range");
    }
    if (head >= num_heads) {
        throw InvalidInput("decoder_row: head out of range");
    }
    if (output_token >= num_output_tokens) {
        throw InvalidInput("decoder_row: output token out of range");
    }
    const std::size_t offset =
        ((static_cast<std::size_t>(layer) * num_heads + head) * num_output_tokens + output_token) *
        num_visual_tokens;
    return {values.data() + offset, num_visual_tokens};
}

void AttentionTrace::validate() const {
    if (num_layers == 0 || num_heads == 0 || num_visual_tokens == 0) {
        throw CorruptPayload("trace: all of L, H, N_v must be positive");
    }
    if (role == TraceRole::Encoder && num_output_tokens != 0) {
        throw CorruptPayload("trace: encoder trace must have num_output_tokens = 0");
    }
    if (role == TraceRole::Decoder && num_output_tokens == 0) {
        throw CorruptPayload("trace: decoder trace must have num_output_tokens >= 1");
    }
    if (values.size() != expected_value_count()) {
        throw CorruptPayload("trace: payload size does not match header dimensions");
    }
    const std::size_t n_rows = values.size() / num_visual_tokens;
    for (std::size_t r = 0; r < n_rows; ++r) {
        double row_sum = 0.0;
        for (std::size_t i = 0; i < num_visual_tokens; ++i) {
            const double v = values[r * num_visual_tokens + i];
            if (!std::isfinite(v) || v < kValueLow || v > kValueHigh) {
                throw RangeError("trace: attention value outside [0, 1]");
            }
            row_sum += v;
        }
        if (row_sum > kRowSumHigh) {
            throw RangeError("trace: stored row slice sums past 1");
        }
    }
}

std::size_t write_trace(const AttentionTrace& trace, std::ostream& sink) {
    trace.validate();

    nlohmann::json header{
        {"role", to_string(trace.role)},
        {"num_layers", trace.num_layers},
        {"num_heads", trace.num_heads},
        {"num_visual_tokens", trace.num_visual_tokens},
        {"num_output_tokens", trace.num_output_tokens},
        {"dtype", "f32"},
        {"array_order", trace.role == TraceRole::Encoder ? kOrderEncoder : kOrderDecoder},
    };
    const std::string header_text = header.dump();

    sink.write(kTraceMagic, 4);
    put_u32(sink, kTraceVersion);
    put_u64(sink, header_text.size());
    sink.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    sink.write(reinterpret_cast<const char*>(trace.values.data()),
               static_cast<std::streamsize>(trace.values.size() * sizeof(float)));
    if (!sink) {
        throw IoError("write_trace: sink failure");
    }
    return 4 + 4 + 8 + header_text.size() + trace.values.size() * sizeof(float);
}

std::size_t write_trace_file(const AttentionTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("write_trace_file: cannot open " + path.string());
    }
    return write_trace(trace, out);
}

AttentionTrace read_trace(std::istream& source) {
    char magic[4];
    source.read(magic, 4);
    if (source.gcount() != 4 || std::memcmp(magic, kTraceMagic, 4) != 0) {
        throw FormatError("read_trace: bad magic");
    }

    std::uint32_t version = 0;
    if (!get_u32(source, version)) {
        throw FormatError("read_trace: truncated version field");
    }
    if (version != kTraceVersion) {
        throw UnsupportedVersion("read_trace: unsupported version " + std::to_string(version));
    }

    std::uint64_t header_len = 0;
    if (!get_u64(source, header_len)) {
        throw FormatError("read_trace: truncated header length");
    }
    if (header_len == 0 || header_len > kMaxHeaderBytes) {
        throw FormatError("read_trace: implausible header length");
    }

    std::string header_text(header_len, '\0');
    source.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (static_cast<std::uint64_t>(source.gcount()) != header_len) {
        throw FormatError("read_trace: truncated header");
    }

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("read_trace: header is not valid JSON: ") + e.what());
    }
    if (!header.is_object() || !header.contains("role") || !header["role"].is_string()) {
        throw FormatError("read_trace: header missing role");
    }

    AttentionTrace trace;
    trace.role = role_from_string(header["role"].get<std::string>());
    trace.num_layers = header_u32(header, "num_layers");
    trace.num_heads = header_u32(header, "num_heads");
    trace.num_visual_tokens = header_u32(header, "num_visual_tokens");
    trace.num_output_tokens = header_u32(header, "num_output_tokens");

    if (!header.contains("dtype") || header["dtype"] != "f32") {
        throw FormatError("read_trace: unsupported dtype");
    }
    const char* expected_order =
        trace.role == TraceRole::Encoder ? kOrderEncoder : kOrderDecoder;
    if (!header.contains("array_order") || header["array_order"] != expected_order) {
        throw FormatError("read_trace: array_order does not match role");
    }
    if (trace.num_layers == 0 || trace.num_heads == 0 || trace.num_visual_tokens == 0) {
        throw CorruptPayload("read_trace: zero dimension in header");
    }

    const std::size_t n_values = trace.expected_value_count();
    trace.values.resize(n_values);
    source.read(reinterpret_cast<char*>(trace.values.data()),
                static_cast<std::streamsize>(n_values * sizeof(float)));
    if (static_cast<std::size_t>(source.gcount()) != n_values * sizeof(float)) {
        throw CorruptPayload("read_trace: payload shorter than header dimensions require");
    }

    // The payload length is fully determined by the header; anything after
    // it means the container is malformed.
    source.peek();
    if (!source.eof()) {
        throw FormatError("read_trace: trailing bytes after payload");
    }

    trace.validate();
    return trace;
}

AttentionTrace read_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("read_trace_file: cannot open " + path.string());
    }
    return read_trace(in);
}

}  // namespace vtc
