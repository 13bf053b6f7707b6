// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vtc {

enum class TraceRole { Encoder, Decoder };

std::string to_string(TraceRole role);
TraceRole role_from_string(const std::string& s);

// Per-layer, per-head attention rows restricted to the visual positions.
// Encoder traces hold the [CLS] query row for each (layer, head); decoder
// traces hold one row per (layer, head, output token). Values are
// post-softmax probabilities; a stored slice of a full softmax row sums
// to at most 1 (plus float tolerance).
//
// Payload layout is row-major float32:
//   encoder: [layer][head][visual]
//   decoder: [layer][head][output][visual]
struct AttentionTrace {
    TraceRole role = TraceRole::Encoder;
    std::uint32_t num_layers = 0;
    std::uint32_t num_heads = 0;
    std::uint32_t num_visual_tokens = 0;
    std::uint32_t num_output_tokens = 0;  // decoder only; 0 for encoder
    std::vector<float> values;

    std::size_t expected_value_count() const;

    std::span<const float> encoder_row(std::uint32_t layer, std::uint32_t head) const;
    std::span<const float> decoder_row(std::uint32_t layer, std::uint32_t head,
                                       std::uint32_t output_token) const;

    // Checks dimension/payload agreement, value range and row-slice sums.
    // Throws CorruptPayload or RangeError on violation.
    void validate() const;

    bool operator==(const AttentionTrace& other) const = default;
};

inline constexpr char kTraceMagic[4] = {'V', 'T', 'C', 'T'};
inline constexpr std::uint32_t kTraceVersion = 1;

// Serializes the trace into the VTCT container. Returns the number of
// bytes written. Throws IoError on sink failure, and the validate()
// errors if the trace violates its own invariants.
std::size_t write_trace(const AttentionTrace& trace, std::ostream& sink);
std::size_t write_trace_file(const AttentionTrace& trace, const std::filesystem::path& path);

// Parses and validates a VTCT container. Never reads past the declared
// payload; trailing bytes are a FormatError. Throws FormatError,
// UnsupportedVersion, CorruptPayload or RangeError on malformed input.
AttentionTrace read_trace(std::istream& source);
AttentionTrace read_trace_file(const std::filesystem::path& path);

}  // namespace vtc
