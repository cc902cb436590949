#include "ghsec/util.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ghsec {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count)
{
    if (pos + count > text.size())
        throw ParseError("timestamp too short: '" + std::string(text) + "'");
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        char c = text[i];
        if (c < '0' || c > '9')
            throw ParseError("expected digit in timestamp: '" + std::string(text) + "'");
        value = value * 10 + (c - '0');
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c)
{
    if (pos >= text.size() || text[pos] != c)
        throw ParseError("malformed timestamp: '" + std::string(text) + "'");
}

} // namespace

Timestamp parse_timestamp(std::string_view text)
{
    using namespace std::chrono;
    text = trim(text);
    int y = parse_digits(text, 0, 4);
    expect_char(text, 4, '-');
    int mo = parse_digits(text, 5, 2);
    expect_char(text, 7, '-');
    int d = parse_digits(text, 8, 2);
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok())
        throw ParseError("invalid calendar date: '" + std::string(text) + "'");
    Timestamp result{sys_days{ymd}};
    if (text.size() == 10)
        return result;

    if (text[10] != 'T' && text[10] != ' ')
        throw ParseError("malformed timestamp: '" + std::string(text) + "'");
    int hh = parse_digits(text, 11, 2);
    expect_char(text, 13, ':');
    int mm = parse_digits(text, 14, 2);
    expect_char(text, 16, ':');
    int ss = parse_digits(text, 17, 2);
    if (hh > 23 || mm > 59 || ss > 60)
        throw ParseError("invalid time of day: '" + std::string(text) + "'");
    result += hours{hh} + minutes{mm} + seconds{ss};

    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
    }
    if (pos == text.size())
        return result;
    if (text[pos] == 'Z' && pos + 1 == text.size())
        return result;
    if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size()) {
        int oh = parse_digits(text, pos + 1, 2);
        expect_char(text, pos + 3, ':');
        int om = parse_digits(text, pos + 4, 2);
        auto offset = hours{oh} + minutes{om};
        return text[pos] == '+' ? result - offset : result + offset;
    }
    throw ParseError("malformed timestamp offset: '" + std::string(text) + "'");
}

Date parse_date(std::string_view text)
{
    return day_of(parse_timestamp(text));
}

std::string format_date(Date d)
{
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(Timestamp t)
{
    using namespace std::chrono;
    auto day = floor<days>(t);
    hh_mm_ss tod{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(day).c_str(),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

std::string to_lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s)
{
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

bool contains_ci(std::string_view haystack, std::string_view needle)
{
    if (needle.empty())
        return true;
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool starts_with_ci(std::string_view s, std::string_view prefix)
{
    return s.size() >= prefix.size() && to_lower(s.substr(0, prefix.size())) == to_lower(prefix);
}

namespace {

// Length of a CVE-\d{4}-\d{4,} match starting at pos, or 0.
std::size_t cve_match_at(std::string_view text, std::size_t pos)
{
    auto digit = [&](std::size_t i) {
        return i < text.size() && text[i] >= '0' && text[i] <= '9';
    };
    if (text.compare(pos, 4, "CVE-") != 0)
        return 0;
    std::size_t i = pos + 4;
    for (int k = 0; k < 4; ++k, ++i)
        if (!digit(i))
            return 0;
    if (i >= text.size() || text[i] != '-')
        return 0;
    ++i;
    std::size_t start = i;
    while (digit(i))
        ++i;
    return i - start >= 4 ? i - pos : 0;
}

} // namespace

bool contains_cve_id(std::string_view text)
{
    for (auto pos = text.find("CVE-"); pos != std::string_view::npos; pos = text.find("CVE-", pos + 1))
        if (cve_match_at(text, pos) > 0)
            return true;
    return false;
}

bool is_cve_id(std::string_view text)
{
    return !text.empty() && cve_match_at(text, 0) == text.size();
}

std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next()
{
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

std::uint64_t SplitMix64::below(std::uint64_t bound)
{
    if (bound == 0)
        throw PreconditionError("SplitMix64::below: bound must be positive");
    // Rejection sampling removes modulo bias.
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % bound;
}

double SplitMix64::uniform()
{
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis)
{
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void atomic_write(const std::filesystem::path& path, std::string_view content)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string sha256_hex(std::string_view bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

} // namespace ghsec
