#pragma once

// Drives the CLI over the bundled corpus fixture. Shared by the CLI tests
// and the acceptance binary.

#include "ghsec/cli.hpp"

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace pipeline {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

inline Outcome invoke(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    Outcome o;
    o.code = ghsec::cli::run(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

inline const std::vector<std::string> kDetectors = {"baseline", "embedding", "llm", "combined"};

/// Copies the corpus fixture into `dir` and runs build, train, detect and
/// evaluate. Returns the first failing step, or an Outcome with code 0.
inline Outcome run_fixture_pipeline(const std::filesystem::path& fixtures, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (auto name : {"issues.jsonl", "references.jsonl", "cves.jsonl"})
        fs::copy_file(fixtures / "corpus" / name, dir / name, fs::copy_options::overwrite_existing);
    const std::vector<std::string> common = {"--out-dir", dir.string(), "--seed", "42"};
    auto with = [&](std::vector<std::string> tail) {
        auto args = common;
        args.insert(args.end(), tail.begin(), tail.end());
        return args;
    };
    std::vector<std::vector<std::string>> steps = {
        with({"build", "--neg-per-pos", "4", "--train-fraction", "0.6"}),
        with({"train"}),
    };
    for (const auto& d : kDetectors)
        steps.push_back(with({"detect", "--detector", d}));
    steps.push_back(with({"evaluate"}));
    steps.push_back(with({"similarity"}));
    for (const auto& s : steps) {
        auto o = invoke(s);
        if (o.code != 0)
            return o;
    }
    return {};
}

} // namespace pipeline
