// soliclone: mine domain models from Solidity corpora via near-miss clones.
//
//   soliclone <demographics|detect|categorize|model|full> --corpus <dir>
//             [--mode t1|t2|t2c|t3-1|t3-2c] [--threshold N] [--min-lines N]
//             [--max-lines N] [--rules <file>] [--out <dir>] [--config <file>]
//
// Exit codes: 0 success, 2 corpus error, 3 configuration error, 4 rule-file
// error, 5 unknown model target.

#include "soliclone/commands.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

namespace {

struct Flags {
    std::string config_file;
    std::string corpus;
    std::string mode;
    int threshold = 0;
    int min_lines = 0;
    int max_lines = 0;
    bool include_modifiers = false;
    std::string rules;
    std::string tokens;
    std::string metadata;
    std::string out;
    int model_class = 0;
    std::string model_root;
    unsigned jobs = 0;
};

struct Options {
    CLI::Option* threshold = nullptr;
    CLI::Option* min_lines = nullptr;
    CLI::Option* max_lines = nullptr;
    CLI::Option* include_modifiers = nullptr;
    CLI::Option* model_class = nullptr;
    CLI::Option* model_root = nullptr;
    CLI::Option* jobs = nullptr;
};

Options add_common(CLI::App& cmd, Flags& f) {
    Options o;
    cmd.add_option("--config", f.config_file, "key=value configuration file; flags override it");
    cmd.add_option("--corpus", f.corpus, "directory of .sol files (searched recursively)");
    cmd.add_option("--mode", f.mode, "clone type: t1, t2, t2c, t3-1 (alias t3-2), t3-2c");
    o.threshold = cmd.add_option("--threshold", f.threshold, "max difference threshold in percent");
    o.min_lines = cmd.add_option("--min-lines", f.min_lines, "smallest fragment in lines (default 10)");
    o.max_lines = cmd.add_option("--max-lines", f.max_lines, "largest fragment in lines (default 2500)");
    o.include_modifiers = cmd.add_flag("--include-modifiers", f.include_modifiers, "also extract modifier bodies");
    cmd.add_option("--rules", f.rules, "categorization rule file (default: built-in rules)");
    cmd.add_option("--tokens", f.tokens, "preserved-token list (default: built-in list)");
    cmd.add_option("--metadata", f.metadata, "per-file tag sidecar: 'path | tag tag ...'");
    cmd.add_option("--out", f.out, "output directory (default soliclone-out)");
    o.jobs = cmd.add_option("--jobs", f.jobs, "worker threads for pair detection (0 = all cores)");
    return o;
}

soliclone::RunConfig resolve(const Flags& f, const Options& o) {
    soliclone::RunConfig cfg;
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file, std::ios::binary);
        if (!in) throw soliclone::ConfigError("cannot read config file " + f.config_file);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        soliclone::apply_config_text(cfg, text);
    }
    if (!f.corpus.empty()) cfg.corpus_root = f.corpus;
    if (!f.mode.empty()) {
        const auto t = soliclone::parse_clone_type(f.mode);
        if (!t) throw soliclone::ConfigError("unknown mode '" + f.mode + "'");
        cfg.mode = *t;
    }
    if (o.threshold->count()) cfg.threshold = f.threshold;
    if (o.min_lines->count()) cfg.min_lines = f.min_lines;
    if (o.max_lines->count()) cfg.max_lines = f.max_lines;
    if (o.include_modifiers->count()) cfg.include_modifiers = f.include_modifiers;
    if (!f.rules.empty()) cfg.rule_file = f.rules;
    if (!f.tokens.empty()) cfg.token_file = f.tokens;
    if (!f.metadata.empty()) cfg.metadata_file = f.metadata;
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (o.jobs->count()) cfg.jobs = f.jobs;
    if (o.model_class && o.model_class->count()) cfg.model_class = f.model_class;
    if (o.model_root && o.model_root->count()) cfg.model_root = f.model_root;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"soliclone: near-miss clone mining and domain-model extraction for Solidity corpora"};
    app.require_subcommand(1);

    Flags flags;
    std::map<std::string, Options> options;
    auto* demographics = app.add_subcommand("demographics", "count files, contracts, libraries, interfaces, events, modifiers");
    auto* detect = app.add_subcommand("detect", "extract, normalize and detect clone pairs and classes for one mode");
    auto* categorize = app.add_subcommand("categorize", "assign clone classes to domain categories");
    auto* model = app.add_subcommand("model", "reverse-engineer structural models and the merged metamodel");
    auto* full = app.add_subcommand("full", "demographics, all five detection modes, categorization and models");
    for (auto* cmd : {demographics, detect, categorize, model, full}) options[cmd->get_name()] = add_common(*cmd, flags);
    options["model"].model_class = model->add_option("--class", flags.model_class, "model only this clone class id");
    options["model"].model_root = model->add_option("--root", flags.model_root, "model only this contract");
    model->get_option("--class")->excludes(model->get_option("--root"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return soliclone::kExitConfig;
    }

    CLI::App* chosen = app.get_subcommands().front();
    soliclone::RunConfig cfg;
    try {
        cfg = resolve(flags, options[chosen->get_name()]);
    } catch (const soliclone::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return soliclone::kExitConfig;
    }

    const std::string name = chosen->get_name();
    if (name == "demographics") return soliclone::cmd_demographics(cfg, std::cout, std::cerr);
    if (name == "detect") return soliclone::cmd_detect(cfg, std::cout, std::cerr);
    if (name == "categorize") return soliclone::cmd_categorize(cfg, std::cout, std::cerr);
    if (name == "model") return soliclone::cmd_model(cfg, std::cout, std::cerr);
    return soliclone::cmd_full(cfg, std::cout, std::cerr);
}
