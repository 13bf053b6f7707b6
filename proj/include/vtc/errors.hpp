// Copyright (c) 2026 vtc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace vtc {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument values: empty input, non-finite element, length mismatch.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A correlation was requested on a constant sequence; the statistic is
// undefined there and we refuse to silently return 0.
class DegenerateVariance : public Error {
public:
    using Error::Error;
};

// Underlying byte sink/source failed (disk full, unreadable file, ...).
class IoError : public Error {
public:
    using Error::Error;
};

// Container structure is not a valid trace: bad magic, malformed header,
// trailing bytes after the declared payload.
class FormatError : public Error {
public:
    using Error::Error;
};

// Valid container but a version this build does not understand.
class UnsupportedVersion : public Error {
public:
    using Error::Error;
};

// Header dimensions and payload byte count disagree, or the payload is
// truncated.
class CorruptPayload : public Error {
public:
    using Error::Error;
};

// A stored attention value is outside the tolerated probability range,
// or a stored row slice sums past 1.
class RangeError : public Error {
public:
    using Error::Error;
};

// A trace of the wrong role (encoder vs decoder) was passed.
class RoleError : public Error {
public:
    using Error::Error;
};

// Layer index out of range for the trace.
class InvalidLayer : public Error {
public:
    using Error::Error;
};

// Ensemble depth K outside [1, L-1].
class InvalidK : public Error {
public:
    using Error::Error;
};

// Trace shape unusable for the requested operation (e.g. fewer than two
// encoder layers, so no penultimate layer exists).
class InvalidTrace : public Error {
public:
    using Error::Error;
};

// Decoder trace holds no output-token rows.
class NoOutputTokens : public Error {
public:
    using Error::Error;
};

// Keep budget of zero.
class InvalidBudget : public Error {
public:
    using Error::Error;
};

// A selection does not fit the sequence it is applied to.
class SelectionMismatch : public Error {
public:
    using Error::Error;
};

// Two selections are not comparable (different budgets or token counts).
class InvalidComparison : public Error {
public:
    using Error::Error;
};

// Encoder and decoder traces disagree on the visual token count.
class TraceMismatch : public Error {
public:
    using Error::Error;
};

// Simulator or cost-model configuration violates its invariants.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

}  // namespace vtc
