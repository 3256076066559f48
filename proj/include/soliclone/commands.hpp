#pragma once

#include "soliclone/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace soliclone {

class ModelTargetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class Session {
public:
    Session(RunConfig cfg, std::ostream& out, std::ostream& err)
        : cfg_(std::move(cfg)), out_(out), err_(err), t0_(std::chrono::steady_clock::now()) {
        report_["config"] = cfg_.to_json();
    }

    const RunConfig& cfg() const { return cfg_; }
    std::ostream& out() { return out_; }
    nlohmann::json& report() { return report_; }
    std::filesystem::path out_path(const std::string& name) const {
        return std::filesystem::path(cfg_.output_dir) / name;
    }

    void validate_config() {
        validate(cfg_.clone_config());
        if (!cfg_.token_file.empty()) {
            try {
                tokens_ = PreservedTokens::load(cfg_.token_file);
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
        }
        if (!cfg_.metadata_file.empty()) {
            try {
                sidecar_ = MetadataSidecar::load(cfg_.metadata_file);
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
        }
    }

    void load_rules() { rules_ = cfg_.rule_file.empty() ? default_rules() : soliclone::load_rules(cfg_.rule_file); }

    Workspace& workspace() {
        if (!ws_) {
            const auto t = std::chrono::steady_clock::now();
            if (cfg_.corpus_root.empty()) throw ConfigError("--corpus is required");
            ws_ = build_workspace(load_corpus(cfg_.corpus_root),
                                  {cfg_.min_lines, cfg_.max_lines, cfg_.include_modifiers}, tokens_);
            for (const auto& s : ws_->corpus.skipped) err_ << "skipped " << s.path << ": " << to_string(s.kind) << "\n";
            report_["skipped_files"] = skipped_json(ws_->corpus);
            report_["extraction"] = extraction_json(ws_->extraction);
            lap("parse+extract", t);
        }
        return *ws_;
    }

    const ModeResult& mode_result(CloneType t) {
        auto it = modes_.find(t);
        if (it == modes_.end()) {
            auto& ws = workspace();
            it = modes_.emplace(t, run_mode(ws, cfg_.clone_config(t), cfg_.jobs)).first;
            record("detect " + std::string(to_string(t)), it->second.seconds);
            const auto& r = it->second;
            const auto tag = mode_file_tag(t);
            write_json(out_path("pairs_" + tag + ".json"),
                       {{"config", cfg_.to_json()}, {"summary", mode_summary_json(r)}, {"pairs", pairs_json(r)}});
            write_json(out_path("classes_" + tag + ".json"),
                       {{"config", cfg_.to_json()}, {"summary", mode_summary_json(r)}, {"classes", classes_json(r)}});
            report_["modes"][std::string(to_string(t))] = mode_summary_json(r);
        }
        return it->second;
    }

    const Categorizer& categorizer() {
        if (!categorizer_)
            categorizer_.emplace(rules_, workspace().corpus, workspace().store, cfg_.metadata_file.empty() ? nullptr : &sidecar_);
        return *categorizer_;
    }

    void lap(const std::string& stage, std::chrono::steady_clock::time_point since) {
        record(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count());
    }

    void record(const std::string& stage, double s) {
        timing_ << std::left << std::setw(20) << stage << std::fixed << std::setprecision(3) << s << " s\n";
    }

    void finish(const std::string& command) {
        report_["command"] = command;
        write_json(out_path("run_report.json"), report_);
        lap("total", t0_);
        write_atomic(out_path("timing.txt"), timing_.str());
    }

private:
    RunConfig cfg_;
    std::ostream& out_;
    std::ostream& err_;
    std::chrono::steady_clock::time_point t0_;
    nlohmann::json report_;
    std::ostringstream timing_;
    PreservedTokens tokens_ = PreservedTokens::defaults();
    MetadataSidecar sidecar_;
    std::vector<CategoryRule> rules_;
    std::optional<Workspace> ws_;
    std::map<CloneType, ModeResult> modes_;
    std::optional<Categorizer> categorizer_;
};

inline void print_demographics(std::ostream& os, const DemographicsReport& d, std::size_t skipped) {
    os << "Demographics\n";
    os << std::left << std::setw(18) << "Total Sol Files" << std::setw(12) << "Contracts" << std::setw(12)
       << "Libraries" << std::setw(12) << "Interfaces" << std::setw(10) << "Events" << "Modifiers\n";
    os << std::left << std::setw(18) << d.total_files << std::setw(12) << d.contracts << std::setw(12) << d.libraries
       << std::setw(12) << d.interfaces << std::setw(10) << d.events << d.modifiers << "\n";
    if (skipped) os << "(" << skipped << " file(s) skipped, see run_report.json)\n";
}

inline void print_clone_table(std::ostream& os, const std::vector<const ModeResult*>& results) {
    auto row = [&](const std::string& label, auto cell) {
        os << std::left << std::setw(20) << label;
        for (const auto* r : results) os << std::setw(10) << cell(*r);
        os << "\n";
    };
    row("Clone Type", [](const ModeResult& r) { return std::string(to_string(r.config.mode.clone_type)); });
    row("Clone Pairs", [](const ModeResult& r) { return std::to_string(r.pairs.size()); });
    row("Clone Classes", [](const ModeResult& r) { return std::to_string(r.classes.size()); });
    row("Max diff threshold", [](const ModeResult& r) { return std::to_string(r.config.max_diff_threshold) + "%"; });
}

inline void print_category_table(std::ostream& os, const std::vector<CategoryReport>& reports, CloneType mode) {
    os << std::left << std::setw(6) << "S.no" << std::setw(24) << "Category" << std::setw(14) << "Cluster Size"
       << std::setw(22) << "Similarity Min/Max" << "Detection Type\n";
    int n = 0;
    for (const auto& r : reports) {
        os << std::left << std::setw(6) << ++n << std::setw(24) << to_string(r.category) << std::setw(14)
           << r.accumulated_size << std::setw(22)
           << (std::to_string(r.min_similarity) + "%/" + std::to_string(r.max_similarity) + "%") << to_string(mode)
           << "\n";
    }
}

inline std::vector<CategoryReport> categorize_into(Session& s) {
    const auto& result = s.mode_result(s.cfg().mode);
    const auto& cat = s.categorizer();
    auto reports = cat.accumulate_categories(result.classes);
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& c : result.classes)
        per_class.push_back({{"class_id", c.id}, {"category", std::string(to_string(cat.categorize_class(c)))}});
    const auto cats = categories_json(reports, s.cfg().mode);
    write_json(s.out_path("categories.json"),
               {{"config", s.cfg().to_json()}, {"categories", cats}, {"class_categories", per_class}});
    s.report()["categories"] = cats;
    return reports;
}

inline nlohmann::json model_file_json(const RunConfig& cfg, const StructuralModel& m, const std::string& file,
                                      std::optional<int> class_id) {
    nlohmann::json j = {{"config", cfg.to_json()}, {"file", file}, {"model", to_json(m)}};
    if (class_id) j["class_id"] = *class_id;
    return j;
}

inline void write_model(Session& s, const std::string& stem, const StructuralModel& m, const std::string& file,
                        std::optional<int> class_id) {
    write_atomic(s.out_path("models/" + stem + ".dot"), render_dot(m));
    write_json(s.out_path("models/" + stem + ".json"), model_file_json(s.cfg(), m, file, class_id));
}

inline void model_into(Session& s) {
    const auto& result = s.mode_result(s.cfg().mode);
    const auto& cat = s.categorizer();
    auto& ws = s.workspace();

    if (s.cfg().model_class) {
        const int id = *s.cfg().model_class;
        const auto it = std::find_if(result.classes.begin(), result.classes.end(), [&](const auto& c) { return c.id == id; });
        if (it == result.classes.end())
            throw ModelTargetError("no clone class " + std::to_string(id) + " (mode " +
                                   std::string(to_string(s.cfg().mode)) + " has " +
                                   std::to_string(result.classes.size()) + " classes)");
        const Fragment* rep = ws.store.find(it->representative);
        const ParsedUnit* unit = rep ? ws.corpus.find(rep->file) : nullptr;
        if (!rep || !unit || rep->contract == kFileScopeName)
            throw ModelTargetError("class " + std::to_string(id) + " has no contract-level representative");
        const auto model = extract_model(*unit, rep->contract, cat.categorize_class(*it));
        write_model(s, "class_" + std::to_string(id), model, unit->source.path, id);
        s.out() << "wrote model for class " << id << " (" << rep->contract << ", " << to_string(model.category) << ")\n";
        return;
    }

    if (s.cfg().model_root) {
        const std::string& root = *s.cfg().model_root;
        const ParsedUnit* unit = nullptr;
        for (const auto& u : ws.corpus.units) {
            if (std::any_of(u.declarations.begin(), u.declarations.end(), [&](const auto& d) { return d.name == root; })) {
                unit = &u;
                break;
            }
        }
        if (!unit) throw ModelTargetError("no contract named '" + root + "' in the corpus");
        DomainCategory category = DomainCategory::Uncategorized;
        for (const auto& c : result.classes) {
            const Fragment* rep = ws.store.find(c.representative);
            if (rep && rep->file == unit->source.path && rep->contract == root) {
                category = cat.categorize_class(c);
                break;
            }
        }
        const auto model = extract_model(*unit, root, category);
        write_model(s, root, model, unit->source.path, std::nullopt);
        s.out() << "wrote model for " << root << " (" << to_string(category) << ")\n";
        return;
    }

    // One model per populated category, from the largest class whose
    // representative lives in a contract.
    const auto reports = cat.accumulate_categories(result.classes);
    std::vector<StructuralModel> models;
    for (const auto& r : reports) {
        if (r.category == DomainCategory::Uncategorized) continue;
        for (const int id : r.class_ids) {
            const auto& cls = result.classes[static_cast<std::size_t>(id - 1)];
            const Fragment* rep = ws.store.find(cls.representative);
            const ParsedUnit* unit = rep ? ws.corpus.find(rep->file) : nullptr;
            if (!rep || !unit || rep->contract == kFileScopeName) continue;
            auto model = extract_model(*unit, rep->contract, r.category);
            write_model(s, std::string(to_string(r.category)), model, unit->source.path, id);
            models.push_back(std::move(model));
            break;
        }
    }
    const auto meta = merge_models(models);
    write_atomic(s.out_path("metamodel.dot"), render_dot(meta));
    write_json(s.out_path("metamodel.json"), {{"config", s.cfg().to_json()}, {"metamodel", to_json(meta)}});
    s.out() << "wrote " << meta.models.size() << " category model(s) and metamodel ("
            << meta.shared_entities.size() << " shared entities)\n";
}

template <typename Body>
int guarded(const RunConfig& cfg, std::ostream& out, std::ostream& err, const std::string& name, Body&& body) {
    try {
        Session s(cfg, out, err);
        body(s);
        s.finish(name);
        return kExitOk;
    } catch (const CorpusError& e) {
        err << "error: " << e.what() << "\n";
        return kExitCorpus;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const RuleFileError& e) {
        err << "error: " << e.what() << "\n";
        return kExitRules;
    } catch (const ModelTargetError& e) {
        err << "error: " << e.what() << "\n";
        return kExitModelTarget;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return kExitModelTarget;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}

} // namespace detail

inline int cmd_demographics(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(cfg, out, err, "demographics", [](detail::Session& s) {
        s.validate_config();
        const auto& ws = s.workspace();
        const auto d = corpus_demographics(ws.corpus.units);
        s.report()["demographics"] = to_json(d);
        write_json(s.out_path("demographics.json"), {{"config", s.cfg().to_json()},
                                                     {"demographics", to_json(d)},
                                                     {"skipped_files", skipped_json(ws.corpus)}});
        detail::print_demographics(s.out(), d, ws.corpus.skipped.size());
    });
}

inline int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(cfg, out, err, "detect", [](detail::Session& s) {
        s.validate_config();
        const auto& r = s.mode_result(s.cfg().mode);
        detail::print_clone_table(s.out(), {&r});
    });
}

inline int cmd_categorize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(cfg, out, err, "categorize", [](detail::Session& s) {
        s.validate_config();
        s.load_rules();
        const auto reports = detail::categorize_into(s);
        detail::print_category_table(s.out(), reports, s.cfg().mode);
    });
}

inline int cmd_model(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(cfg, out, err, "model", [](detail::Session& s) {
        s.validate_config();
        s.load_rules();
        detail::model_into(s);
    });
}

/// demographics, detection in all five modes, categorization of the
/// configured mode's classes, and per-category models plus the metamodel.
inline int cmd_full(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(cfg, out, err, "full", [](detail::Session& s) {
        s.validate_config();
        for (const auto t : kAllCloneTypes) validate(s.cfg().clone_config(t));
        s.load_rules();
        const auto& ws = s.workspace();
        const auto d = corpus_demographics(ws.corpus.units);
        s.report()["demographics"] = to_json(d);
        write_json(s.out_path("demographics.json"), {{"config", s.cfg().to_json()},
                                                     {"demographics", to_json(d)},
                                                     {"skipped_files", skipped_json(ws.corpus)}});
        detail::print_demographics(s.out(), d, ws.corpus.skipped.size());
        std::vector<const ModeResult*> results;
        for (const auto t : kAllCloneTypes) results.push_back(&s.mode_result(t));
        s.out() << "\n";
        detail::print_clone_table(s.out(), results);
        s.out() << "\n";
        const auto reports = detail::categorize_into(s);
        detail::print_category_table(s.out(), reports, s.cfg().mode);
        s.out() << "\n";
        detail::model_into(s);
    });
}

} // namespace soliclone
