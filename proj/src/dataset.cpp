#include "ghsec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ghsec::dataset {

using nlohmann::json;
using nlohmann::ordered_json;

std::string split_name(Split split)
{
    switch (split) {
    case Split::Unassigned: return "unassigned";
    case Split::ExcludedPreCutoff: return "excluded_pre_cutoff";
    case Split::ExcludedContaminated: return "excluded_contaminated";
    case Split::Train: return "train";
    case Split::Test: return "test";
    }
    return "unassigned";
}

Split split_from_name(std::string_view name)
{
    for (Split s : {Split::Unassigned, Split::ExcludedPreCutoff, Split::ExcludedContaminated, Split::Train,
                    Split::Test})
        if (split_name(s) == name)
            return s;
    throw ParseError("unknown split '" + std::string(name) + "'");
}

CorpusManifest summarize(const std::vector<LabeledIssue>& corpus, std::uint64_t seed, Date cutoff,
                         double train_fraction, Timestamp created)
{
    CorpusManifest m;
    m.total = corpus.size();
    m.seed = seed;
    m.cutoff = cutoff;
    m.created = created;
    m.train_fraction = train_fraction;
    for (const auto& item : corpus) {
        (item.label ? m.positives : m.negatives)++;
        switch (item.split) {
        case Split::Unassigned: ++m.splits.unassigned; break;
        case Split::ExcludedPreCutoff: ++m.splits.excluded_pre_cutoff; break;
        case Split::ExcludedContaminated: ++m.splits.excluded_contaminated; break;
        case Split::Train: ++m.splits.train; break;
        case Split::Test: ++m.splits.test; break;
        }
    }
    return m;
}

LabelResult label_issues(const std::vector<github::IssueRecord>& issues, const std::vector<nvd::ReferenceLink>& links,
                         const std::map<std::string, nvd::CveRecord>& cves)
{
    // Citing links are keyed by canonical issue URL so that /pull/ and
    // trailing-path variants of the same number still match.
    std::map<std::string, std::vector<const nvd::ReferenceLink*>> citing;
    for (const auto& link : links) {
        auto ref = github::parse_issue_url(link.url);
        if (!ref)
            continue;
        citing[github::issue_url(ref->repo, ref->number)].push_back(&link);
    }

    LabelResult out;
    std::set<std::string> matched;
    for (const auto& issue : issues) {
        LabeledIssue li;
        li.issue = issue;
        auto key = issue.html_url;
        if (auto ref = github::parse_issue_url(issue.html_url))
            key = github::issue_url(ref->repo, ref->number);
        if (auto it = citing.find(key); it != citing.end()) {
            matched.insert(key);
            std::set<std::string> ids;
            for (const auto* link : it->second)
                ids.insert(link->cve_id);
            for (const auto& id : ids) {
                LinkedCve lc;
                lc.cve_id = id;
                if (auto cve = cves.find(id); cve != cves.end()) {
                    lc.disclosure_date = cve->second.published;
                    lc.description = cve->second.description;
                    lc.severity = cve->second.severity;
                }
                li.linked_cves.push_back(std::move(lc));
            }
            li.label = true;
        }
        out.issues.push_back(std::move(li));
    }
    for (const auto& [key, refs] : citing)
        if (!matched.count(key))
            for (const auto* link : refs)
                out.orphans.push_back(*link);
    return out;
}

std::vector<LabeledIssue> sample_negatives(const std::vector<LabeledIssue>& labeled, double neg_per_pos,
                                           std::uint64_t seed)
{
    if (!(neg_per_pos > 0.0))
        throw PreconditionError("sample_negatives: neg_per_pos must be positive");

    std::map<github::RepoId, std::size_t> positives;
    std::map<github::RepoId, std::vector<std::size_t>> negatives;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        auto repo = labeled[i].issue.repo();
        if (labeled[i].label)
            ++positives[repo];
        else
            negatives[repo].push_back(i);
    }

    std::vector<bool> keep(labeled.size(), false);
    for (std::size_t i = 0; i < labeled.size(); ++i)
        keep[i] = labeled[i].label;

    SplitMix64 rng(seed);
    for (auto& [repo, idx] : negatives) {
        auto pos = positives.count(repo) ? positives[repo] : 0;
        auto want = static_cast<std::size_t>(std::llround(neg_per_pos * static_cast<double>(pos)));
        want = std::min(want, idx.size());
        rng.shuffle(idx);
        for (std::size_t j = 0; j < want; ++j)
            keep[idx[j]] = true;
    }

    std::vector<LabeledIssue> out;
    for (std::size_t i = 0; i < labeled.size(); ++i)
        if (keep[i])
            out.push_back(labeled[i]);
    return out;
}

SplitResult assign_splits(std::vector<LabeledIssue> labeled, Date cutoff, double train_fraction, std::uint64_t seed,
                          Timestamp created)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw PreconditionError("assign_splits: train fraction must lie in (0, 1)");

    const Timestamp cut = to_timestamp(cutoff);
    std::vector<std::size_t> remaining_pos, remaining_neg;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        auto& item = labeled[i];
        if (item.issue.created_at < cut) {
            bool disclosed_later = std::any_of(item.linked_cves.begin(), item.linked_cves.end(),
                                               [&](const LinkedCve& c) { return c.disclosure_date >= cut; });
            item.split = item.label && disclosed_later ? Split::ExcludedContaminated : Split::ExcludedPreCutoff;
        } else {
            (item.label ? remaining_pos : remaining_neg).push_back(i);
        }
    }

    SplitMix64 rng(seed);
    for (auto* group : {&remaining_pos, &remaining_neg}) {
        rng.shuffle(*group);
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(group->size())));
        for (std::size_t j = 0; j < group->size(); ++j)
            labeled[(*group)[j]].split = j < n_train ? Split::Train : Split::Test;
    }

    SplitResult out;
    std::size_t remainder = remaining_pos.size() + remaining_neg.size();
    if (!labeled.empty() && (remainder == 0 || remainder == labeled.size())) {
        std::ostringstream msg;
        msg << "cutoff " << format_date(cutoff) << " lies outside the corpus date range; "
            << (remainder == 0 ? "every issue was excluded" : "no issue was excluded");
        out.warnings.push_back(msg.str());
    }
    out.manifest = summarize(labeled, seed, cutoff, train_fraction, created);
    out.issues = std::move(labeled);
    return out;
}

// Persistence ----------------------------------------------------------------

ordered_json to_json(const LabeledIssue& item)
{
    ordered_json j = github::to_json(item.issue);
    j["label"] = item.label;
    ordered_json cves = ordered_json::array();
    for (const auto& c : item.linked_cves) {
        ordered_json cj;
        cj["cve_id"] = c.cve_id;
        cj["disclosure_date"] = format_timestamp(c.disclosure_date);
        cj["description"] = c.description;
        if (c.severity)
            cj["severity"] = ordered_json{{"score", c.severity->score}, {"vector", c.severity->vector}};
        else
            cj["severity"] = nullptr;
        cves.push_back(std::move(cj));
    }
    j["linked_cves"] = std::move(cves);
    j["split"] = split_name(item.split);
    return j;
}

LabeledIssue labeled_from_json(const json& j)
{
    LabeledIssue item;
    item.issue = github::issue_from_json(j);
    try {
        item.label = j.at("label").get<bool>();
        for (const auto& cj : j.at("linked_cves")) {
            LinkedCve c;
            c.cve_id = cj.at("cve_id").get<std::string>();
            c.disclosure_date = parse_timestamp(cj.at("disclosure_date").get<std::string>());
            c.description = cj.at("description").get<std::string>();
            if (cj.contains("severity") && !cj["severity"].is_null())
                c.severity = nvd::Severity{cj["severity"].at("score").get<double>(),
                                           cj["severity"].at("vector").get<std::string>()};
            item.linked_cves.push_back(std::move(c));
        }
        item.split = split_from_name(j.at("split").get<std::string>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("labeled issue: ") + e.what());
    }
    if (item.label != !item.linked_cves.empty())
        throw ParseError("labeled issue " + item.issue.html_url + ": label disagrees with linked_cves");
    return item;
}

ordered_json to_json(const CorpusManifest& m)
{
    ordered_json j;
    j["total"] = m.total;
    j["positives"] = m.positives;
    j["negatives"] = m.negatives;
    j["splits"] = ordered_json{{"excluded_pre_cutoff", m.splits.excluded_pre_cutoff},
                               {"excluded_contaminated", m.splits.excluded_contaminated},
                               {"train", m.splits.train},
                               {"test", m.splits.test},
                               {"unassigned", m.splits.unassigned}};
    auto pct = [&](std::size_t n) { return m.total ? 100.0 * static_cast<double>(n) / static_cast<double>(m.total) : 0.0; };
    j["split_percent"] = ordered_json{{"excluded_pre_cutoff", pct(m.splits.excluded_pre_cutoff)},
                                      {"excluded_contaminated", pct(m.splits.excluded_contaminated)},
                                      {"train", pct(m.splits.train)},
                                      {"test", pct(m.splits.test)}};
    j["seed"] = m.seed;
    j["cutoff"] = format_date(m.cutoff);
    j["train_fraction"] = m.train_fraction;
    j["created"] = format_timestamp(m.created);
    return j;
}

CorpusManifest manifest_from_json(const json& j)
{
    try {
        CorpusManifest m;
        m.total = j.at("total").get<std::size_t>();
        m.positives = j.at("positives").get<std::size_t>();
        m.negatives = j.at("negatives").get<std::size_t>();
        const auto& s = j.at("splits");
        m.splits.excluded_pre_cutoff = s.at("excluded_pre_cutoff").get<std::size_t>();
        m.splits.excluded_contaminated = s.at("excluded_contaminated").get<std::size_t>();
        m.splits.train = s.at("train").get<std::size_t>();
        m.splits.test = s.at("test").get<std::size_t>();
        m.splits.unassigned = s.value("unassigned", std::size_t{0});
        m.seed = j.at("seed").get<std::uint64_t>();
        m.cutoff = parse_date(j.at("cutoff").get<std::string>());
        m.train_fraction = j.value("train_fraction", 0.0);
        m.created = parse_timestamp(j.at("created").get<std::string>());
        return m;
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("corpus manifest: ") + e.what());
    }
}

std::filesystem::path manifest_path(const std::filesystem::path& corpus_path)
{
    auto p = corpus_path;
    p += ".manifest.json";
    return p;
}

CorpusManifest write_corpus(const std::vector<LabeledIssue>& corpus, const std::filesystem::path& path,
                            CorpusManifest manifest)
{
    auto fresh = summarize(corpus, manifest.seed, manifest.cutoff, manifest.train_fraction, manifest.created);
    std::string content;
    for (const auto& item : corpus) {
        content += to_json(item).dump();
        content += '\n';
    }
    atomic_write(path, content);
    atomic_write(manifest_path(path), to_json(fresh).dump(2) + "\n");
    return fresh;
}

Corpus read_corpus(const std::filesystem::path& path)
{
    Corpus out;
    std::string content = read_file(path);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        ++line_no;
        auto nl = content.find('\n', pos);
        if (nl == std::string::npos)
            throw IntegrityError(path.string() + ":" + std::to_string(line_no) + ": truncated final line (no newline)",
                                 line_no);
        std::string_view line(content.data() + pos, nl - pos);
        pos = nl + 1;
        if (trim(line).empty())
            continue;
        try {
            out.issues.push_back(labeled_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw IntegrityError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        } catch (const ParseError& e) {
            throw IntegrityError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }

    json mj;
    try {
        mj = json::parse(read_file(manifest_path(path)));
    } catch (const json::exception& e) {
        throw IntegrityError("corpus manifest for " + path.string() + ": " + e.what());
    }
    out.manifest = manifest_from_json(mj);
    auto actual = summarize(out.issues, out.manifest.seed, out.manifest.cutoff, out.manifest.train_fraction,
                            out.manifest.created);
    if (actual.total != out.manifest.total || actual.positives != out.manifest.positives ||
        actual.negatives != out.manifest.negatives || !(actual.splits == out.manifest.splits))
        throw IntegrityError("corpus " + path.string() + " disagrees with its manifest (" +
                             std::to_string(actual.total) + " records vs manifest total " +
                             std::to_string(out.manifest.total) + ")");
    return out;
}

std::vector<LabeledIssue> select_split(const std::vector<LabeledIssue>& corpus, Split split)
{
    std::vector<LabeledIssue> out;
    for (const auto& item : corpus)
        if (item.split == split)
            out.push_back(item);
    return out;
}

} // namespace ghsec::dataset
