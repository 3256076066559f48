#pragma once

#include "soliclone/clone_engine.hpp"
#include "soliclone/cluster_analyzer.hpp"
#include "soliclone/frontend.hpp"
#include "soliclone/model_extractor.hpp"
#include "soliclone/normalizer.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace soliclone {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitCorpus = 2,
    kExitConfig = 3,
    kExitRules = 4,
    kExitModelTarget = 5,
};

/// Everything a run depends on. Embedded verbatim in every JSON report.
struct RunConfig {
    std::string corpus_root;
    CloneType mode = CloneType::T3_2c;
    std::optional<int> threshold; // unset: 0 for t1/t2/t2c, 30 for t3-*
    int min_lines = 10;
    int max_lines = 2500;
    bool include_modifiers = false;
    std::string rule_file;     // empty: built-in default rules
    std::string token_file;    // empty: built-in preserved-token list
    std::string metadata_file; // optional sidecar
    std::string output_dir = "soliclone-out";
    std::optional<int> model_class;
    std::optional<std::string> model_root;
    unsigned jobs = 0;

    int threshold_value() const {
        return threshold.value_or(CloneConfig::defaults_for(mode).max_diff_threshold);
    }

    CloneConfig clone_config(CloneType t) const {
        CloneConfig cfg = CloneConfig::defaults_for(t);
        if (t == mode && threshold) cfg.max_diff_threshold = *threshold;
        cfg.window = {min_lines, max_lines, include_modifiers};
        return cfg;
    }
    CloneConfig clone_config() const { return clone_config(mode); }

    nlohmann::json to_json() const {
        nlohmann::json j = {{"corpus_root", corpus_root},
                            {"mode", std::string(to_string(mode))},
                            {"max_diff_threshold", threshold_value()},
                            {"min_lines", min_lines},
                            {"max_lines", max_lines},
                            {"include_modifiers", include_modifiers},
                            {"rule_file", rule_file.empty() ? "<builtin>" : rule_file},
                            {"token_file", token_file.empty() ? "<builtin>" : token_file},
                            {"metadata_file", metadata_file},
                            {"output_dir", output_dir}};
        if (model_class) j["model_class"] = *model_class;
        if (model_root) j["model_root"] = *model_root;
        return j;
    }
};

/// Applies flat "key = value" text to `cfg`. Blank lines and '#' comments are
/// ignored. Throws ConfigError on unknown keys or malformed values.
inline void apply_config_text(RunConfig& cfg, std::string_view text) {
    int lineno = 0;
    for (const auto& raw : split_lines(text)) {
        ++lineno;
        const std::string line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        const std::string where = "config line " + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        auto as_int = [&](const std::string& v) {
            try {
                std::size_t used = 0;
                const int n = std::stoi(v, &used);
                if (used != v.size()) throw std::invalid_argument(v);
                return n;
            } catch (const std::exception&) {
                throw ConfigError(where + "'" + key + "' expects an integer");
            }
        };
        if (key == "corpus") cfg.corpus_root = value;
        else if (key == "mode") {
            const auto t = parse_clone_type(value);
            if (!t) throw ConfigError(where + "unknown mode '" + value + "'");
            cfg.mode = *t;
        } else if (key == "threshold") cfg.threshold = as_int(value);
        else if (key == "min-lines") cfg.min_lines = as_int(value);
        else if (key == "max-lines") cfg.max_lines = as_int(value);
        else if (key == "include-modifiers") cfg.include_modifiers = value == "true" || value == "1" || value == "yes";
        else if (key == "rules") cfg.rule_file = value;
        else if (key == "tokens") cfg.token_file = value;
        else if (key == "metadata") cfg.metadata_file = value;
        else if (key == "out") cfg.output_dir = value;
        else if (key == "jobs") cfg.jobs = static_cast<unsigned>(as_int(value));
        else throw ConfigError(where + "unknown key '" + key + "'");
    }
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

/// Parsed corpus plus every fragment in the size window.
struct Workspace {
    Corpus corpus;
    FragmentStore store;
    ExtractionStats extraction;
    PreservedTokens tokens = PreservedTokens::defaults();
};

inline Workspace build_workspace(Corpus corpus, const FragmentWindow& window,
                                 const PreservedTokens& tokens = PreservedTokens::defaults()) {
    Workspace ws;
    ws.tokens = tokens;
    std::vector<Fragment> frags;
    for (const auto& unit : corpus.units) {
        auto part = extract_fragments(unit, window, ws.extraction);
        frags.insert(frags.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    ws.corpus = std::move(corpus);
    ws.store = FragmentStore(std::move(frags));
    return ws;
}

struct ExcludedFragment {
    std::string id;
    std::string reason;
};

struct ModeResult {
    CloneConfig config;
    std::size_t fragments = 0; // compared fragments
    std::vector<ExcludedFragment> excluded;
    std::vector<ClonePair> pairs;
    std::vector<CloneClass> classes;
    double seconds = 0;

    std::map<std::size_t, std::size_t> class_size_histogram() const {
        std::map<std::size_t, std::size_t> h;
        for (const auto& c : classes) ++h[c.members.size()];
        return h;
    }
};

inline std::vector<NormalizedFragment> normalize_all(const Workspace& ws, const NormalizationMode& mode,
                                                     std::vector<ExcludedFragment>& excluded) {
    std::vector<NormalizedFragment> out;
    out.reserve(ws.store.all().size());
    for (const auto& f : ws.store.all()) {
        try {
            auto n = normalize(f, mode, ws.tokens);
            if (n.norm_lines.empty()) {
                excluded.push_back({f.id, "EmptyAfterNormalization"});
                continue;
            }
            out.push_back(std::move(n));
        } catch (const LexError& e) {
            excluded.push_back({f.id, std::string(to_string(e.kind()))});
        }
    }
    return out;
}

inline ModeResult run_mode(const Workspace& ws, const CloneConfig& cfg, unsigned jobs = 0) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    ModeResult r;
    r.config = cfg;
    const auto normalized = normalize_all(ws, cfg.mode, r.excluded);
    r.fragments = normalized.size();
    r.pairs = detect_pairs(normalized, cfg, DetectOptions{true, jobs});
    r.classes = build_classes(r.pairs);
    assign_representatives(r.classes, ws.store);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// ---------------------------------------------------------------------------
// JSON views
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const DemographicsReport& d) {
    return {{"total_files", d.total_files}, {"contracts", d.contracts},   {"libraries", d.libraries},
            {"interfaces", d.interfaces},   {"events", d.events},         {"modifiers", d.modifiers}};
}

inline nlohmann::json skipped_json(const Corpus& corpus) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : corpus.skipped)
        arr.push_back({{"path", s.path}, {"kind", std::string(to_string(s.kind))}, {"message", s.message}});
    return arr;
}

inline nlohmann::json pairs_json(const ModeResult& r) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : r.pairs) arr.push_back({{"a", p.a}, {"b", p.b}, {"similarity", p.similarity}});
    return arr;
}

inline nlohmann::json classes_json(const ModeResult& r) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : r.classes)
        arr.push_back({{"id", c.id},
                       {"members", c.members},
                       {"size", c.members.size()},
                       {"min_similarity", c.min_similarity},
                       {"max_similarity", c.max_similarity},
                       {"pair_count", c.pair_count},
                       {"representative", c.representative}});
    return arr;
}

inline nlohmann::json mode_summary_json(const ModeResult& r) {
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [size, count] : r.class_size_histogram()) hist[std::to_string(size)] = count;
    nlohmann::json excluded = nlohmann::json::array();
    for (const auto& e : r.excluded) excluded.push_back({{"id", e.id}, {"reason", e.reason}});
    return {{"mode", std::string(to_string(r.config.mode.clone_type))},
            {"filter", r.config.mode.filter_enabled},
            {"rename", std::string(to_string(r.config.mode.rename))},
            {"max_diff_threshold", r.config.max_diff_threshold},
            {"fragments", r.fragments},
            {"pair_count", r.pairs.size()},
            {"class_count", r.classes.size()},
            {"class_size_histogram", hist},
            {"excluded_fragments", excluded}};
}

inline nlohmann::json categories_json(const std::vector<CategoryReport>& reports, CloneType mode) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports)
        arr.push_back({{"category", std::string(to_string(r.category))},
                       {"accumulated_size", r.accumulated_size},
                       {"min_similarity", r.min_similarity},
                       {"max_similarity", r.max_similarity},
                       {"class_ids", r.class_ids},
                       {"detection_mode", std::string(to_string(mode))}});
    return arr;
}

inline nlohmann::json extraction_json(const ExtractionStats& s) {
    return {{"extracted", s.extracted},
            {"below_min_lines", s.below_min},
            {"above_max_lines", s.above_max},
            {"without_body", s.without_body}};
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Writes via a temporary sibling and rename so readers never see partial files.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_atomic(path, j.dump(2) + "\n");
}

inline std::string mode_file_tag(CloneType t) {
    std::string s(to_string(t));
    for (char& c : s)
        if (c == '-') c = '_';
    return s;
}

} // namespace soliclone
