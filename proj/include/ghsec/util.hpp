#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ghsec {

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure raised by the library derives from Error so
// the CLI can map it onto an exit code in one place.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated operation precondition (bad argument supplied by the caller).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed external data (JSON, dates, URLs, LLM replies).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A persisted artifact is internally inconsistent or truncated.
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& what, std::size_t line = 0)
        : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Time. All timestamps are UTC with second precision.
// ---------------------------------------------------------------------------

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with optional fractional
/// seconds and an optional "Z" or "+hh:mm" / "-hh:mm" offset. Fractions are
/// truncated.
Timestamp parse_timestamp(std::string_view text);
Date parse_date(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp t);
/// "YYYY-MM-DD"
std::string format_date(Date d);

inline Timestamp to_timestamp(Date d) { return Timestamp{d}; }
inline Date day_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

// ---------------------------------------------------------------------------
// Strings
// ---------------------------------------------------------------------------

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view needle);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// True iff `text` contains a substring matching CVE-\d{4}-\d{4,}.
bool contains_cve_id(std::string_view text);
/// True iff the whole of `text` matches CVE-\d{4}-\d{4,}.
bool is_cve_id(std::string_view text);

// ---------------------------------------------------------------------------
// Seeded randomness with a fully specified algorithm (SplitMix64), so sampled
// corpora are identical across standard libraries.
// ---------------------------------------------------------------------------

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform real in [0, 1).
    double uniform();

    template <typename T>
    void shuffle(std::vector<T>& items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file then renames over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

} // namespace ghsec
