#pragma once

#include "soliclone/clone_engine.hpp"
#include "soliclone/default_data.hpp"
#include "soliclone/frontend.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace soliclone {

enum class DomainCategory {
    TokenManagement,
    ArithmeticOperations,
    Exchanges,
    Finance,
    DataOracles,
    Marketplace,
    Gaming,
    Security,
    Uncategorized,
};

inline constexpr std::array<std::string_view, 9> kCategoryNames = {
    "TokenManagement", "ArithmeticOperations", "Exchanges", "Finance",      "DataOracles",
    "Marketplace",     "Gaming",               "Security",  "Uncategorized"};

inline std::string_view to_string(DomainCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

inline std::optional<DomainCategory> parse_category(std::string_view s) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
        if (kCategoryNames[i] == s) return static_cast<DomainCategory>(i);
    return std::nullopt;
}

/// Minimum class similarity for a class to be categorized at all.
inline constexpr int kEligibilityFloor = 70;

struct CategoryRule {
    DomainCategory category = DomainCategory::Uncategorized;
    int order = 0;
    std::set<std::string> required_signatures;
    std::set<std::string> keyword_hints;
    int min_signature_hits = 3;
};

class RuleFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace detail

/// Parses the line-oriented rule format
///   category | order | sig:<signature> ... | kw:<token> ... | hits:<n>
/// Rules come back sorted by order. A category repeated with the same order is
/// merged; with a different order, or two categories sharing an order, the
/// file is rejected.
inline std::vector<CategoryRule> parse_rules(std::string_view text) {
    std::map<DomainCategory, CategoryRule> by_category;
    std::map<int, DomainCategory> by_order;
    int lineno = 0;
    for (const auto& raw : split_lines(text)) {
        ++lineno;
        const std::string line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto where = "rule file line " + std::to_string(lineno) + ": ";
        const auto fields = detail::split(line, '|');
        if (fields.size() != 5) throw RuleFileError(where + "expected 5 '|'-separated fields");

        CategoryRule rule;
        const auto cat = parse_category(fields[0]);
        if (!cat || *cat == DomainCategory::Uncategorized)
            throw RuleFileError(where + "unknown category '" + fields[0] + "'");
        rule.category = *cat;
        try {
            std::size_t used = 0;
            rule.order = std::stoi(fields[1], &used);
            if (used != fields[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw RuleFileError(where + "order must be an integer");
        }
        auto items = [&](const std::string& field, std::string_view prefix, std::set<std::string>& dst) {
            std::istringstream in(field);
            std::string item;
            while (in >> item) {
                if (item.rfind(prefix, 0) != 0 || item.size() == prefix.size())
                    throw RuleFileError(where + "expected '" + std::string(prefix) + "<value>', got '" + item + "'");
                dst.insert(detail::lower(item.substr(prefix.size())));
            }
        };
        items(fields[2], "sig:", rule.required_signatures);
        items(fields[3], "kw:", rule.keyword_hints);
        if (fields[4].rfind("hits:", 0) != 0) throw RuleFileError(where + "expected 'hits:<n>'");
        try {
            rule.min_signature_hits = std::stoi(fields[4].substr(5));
        } catch (const std::exception&) {
            throw RuleFileError(where + "hits must be an integer");
        }
        if (rule.min_signature_hits < 1) throw RuleFileError(where + "hits must be positive");
        if (rule.required_signatures.empty() && rule.keyword_hints.empty())
            throw RuleFileError(where + "rule needs at least one signature or keyword");

        if (auto it = by_order.find(rule.order); it != by_order.end() && it->second != rule.category)
            throw RuleFileError(where + "order " + std::to_string(rule.order) + " already used by " +
                                std::string(to_string(it->second)));
        if (auto it = by_category.find(rule.category); it != by_category.end()) {
            CategoryRule& prev = it->second;
            if (prev.order != rule.order)
                throw RuleFileError(where + "category " + fields[0] + " repeated with conflicting order");
            prev.required_signatures.insert(rule.required_signatures.begin(), rule.required_signatures.end());
            prev.keyword_hints.insert(rule.keyword_hints.begin(), rule.keyword_hints.end());
            prev.min_signature_hits = std::max(prev.min_signature_hits, rule.min_signature_hits);
            continue;
        }
        by_order[rule.order] = rule.category;
        by_category[rule.category] = std::move(rule);
    }
    std::vector<CategoryRule> rules;
    for (auto& [cat, rule] : by_category) rules.push_back(std::move(rule));
    std::sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) { return a.order < b.order; });
    return rules;
}

inline std::vector<CategoryRule> load_rules(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuleFileError("cannot read rule file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_rules(text);
}

inline const std::vector<CategoryRule>& default_rules() {
    static const std::vector<CategoryRule> rules = parse_rules(data::kDefaultRules);
    return rules;
}

/// Per-file free-text tags ("path | tag tag ..."), standing in for external
/// project metadata. Tags are lowercased and add keyword hints.
class MetadataSidecar {
public:
    static MetadataSidecar parse(std::string_view text) {
        MetadataSidecar m;
        for (const auto& raw : split_lines(text)) {
            const std::string line = detail::trim(raw);
            if (line.empty() || line.front() == '#') continue;
            const auto bar = line.find('|');
            if (bar == std::string::npos) continue;
            const std::string path = detail::trim(std::string_view(line).substr(0, bar));
            std::string tags = line.substr(bar + 1);
            for (char& c : tags)
                if (c == ',' || c == ';') c = ' ';
            std::istringstream in(tags);
            std::string tag;
            while (in >> tag) m.tags_[path].insert(detail::lower(tag));
        }
        return m;
    }

    static MetadataSidecar load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read metadata sidecar " + path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse(text);
    }

    const std::set<std::string>* tags_for(const std::string& path) const {
        const auto it = tags_.find(path);
        return it == tags_.end() ? nullptr : &it->second;
    }

private:
    std::map<std::string, std::set<std::string>> tags_;
};

/// The fragment's own canonical signature plus those of every function in
/// its enclosing contract.
inline std::set<std::string> signature_fingerprint(const Fragment& frag, const ParsedUnit& unit) {
    std::set<std::string> sigs;
    const ContractDecl* decl = unit.find(frag.contract);
    if (!decl) return sigs;
    for (const auto& fn : decl->functions) sigs.insert(canonical_signature(fn));
    for (const auto& fn : decl->modifiers) {
        if (fn.span && *fn.span == frag.span && frag.kind == FunctionKind::Modifier) sigs.insert(canonical_signature(fn));
    }
    return sigs;
}

/// What the rules look at for one class.
struct ClassEvidence {
    std::set<std::string> signatures;
    std::set<std::string> keywords; // lowercase
};

/// Signatures from the fingerprint; keywords from the representative's
/// identifiers, the fingerprint's function names, the contract name, and any
/// sidecar tags for the file.
inline ClassEvidence gather_evidence(const Fragment& rep, const ParsedUnit& unit,
                                     const MetadataSidecar* sidecar = nullptr) {
    ClassEvidence ev;
    ev.signatures = signature_fingerprint(rep, unit);
    for (const auto& line : rep.lines) {
        try {
            for (const auto& t : tokenize(line))
                if (t.kind == TokenKind::Identifier) ev.keywords.insert(detail::lower(t.text));
        } catch (const LexError&) {
            // a line may open or close a comment that spans lines; skip it
        }
    }
    for (const auto& sig : ev.signatures) ev.keywords.insert(sig.substr(0, sig.find('(')));
    ev.keywords.insert(detail::lower(rep.contract));
    if (sidecar)
        if (const auto* tags = sidecar->tags_for(rep.file)) ev.keywords.insert(tags->begin(), tags->end());
    return ev;
}

/// Rule evaluation on gathered evidence. `rules` must be in declared order.
inline DomainCategory categorize_evidence(int min_similarity, const ClassEvidence& ev,
                                          const std::vector<CategoryRule>& rules,
                                          int eligibility_floor = kEligibilityFloor) {
    if (min_similarity < eligibility_floor) return DomainCategory::Uncategorized;
    for (const auto& rule : rules) {
        if (rule.required_signatures.empty()) continue;
        int hits = 0;
        for (const auto& sig : rule.required_signatures) hits += static_cast<int>(ev.signatures.count(sig));
        if (hits >= rule.min_signature_hits) return rule.category;
    }
    DomainCategory best = DomainCategory::Uncategorized;
    int best_hits = 1;
    for (const auto& rule : rules) {
        int hits = 0;
        for (const auto& kw : rule.keyword_hints) hits += static_cast<int>(ev.keywords.count(kw));
        if (hits > best_hits) {
            best = rule.category;
            best_hits = hits;
        }
    }
    return best;
}

struct CategoryReport {
    DomainCategory category = DomainCategory::Uncategorized;
    std::size_t accumulated_size = 0;
    int min_similarity = 100;
    int max_similarity = 0;
    std::vector<int> class_ids;
    friend bool operator==(const CategoryReport&, const CategoryReport&) = default;
};

/// Binds rules to a corpus so classes can be categorized by representative.
class Categorizer {
public:
    Categorizer(std::vector<CategoryRule> rules, const Corpus& corpus, const FragmentStore& store,
                const MetadataSidecar* sidecar = nullptr, int eligibility_floor = kEligibilityFloor)
        : rules_(std::move(rules)), corpus_(corpus), store_(store), sidecar_(sidecar), floor_(eligibility_floor) {}

    DomainCategory categorize_class(const CloneClass& cls) const {
        if (cls.min_similarity < floor_) return DomainCategory::Uncategorized;
        const std::string rep = cls.representative.empty() ? select_representative(cls, store_) : cls.representative;
        const Fragment* frag = store_.find(rep);
        if (!frag) return DomainCategory::Uncategorized;
        const ParsedUnit* unit = corpus_.find(frag->file);
        if (!unit) return DomainCategory::Uncategorized;
        return categorize_evidence(cls.min_similarity, gather_evidence(*frag, *unit, sidecar_), rules_, floor_);
    }

    /// One report per populated category (Uncategorized included), ordered by
    /// accumulated size descending, ties in category order.
    std::vector<CategoryReport> accumulate_categories(const std::vector<CloneClass>& classes) const {
        std::map<DomainCategory, CategoryReport> by_cat;
        for (const auto& cls : classes) {
            const auto cat = categorize_class(cls);
            auto& r = by_cat[cat];
            r.category = cat;
            r.accumulated_size += cls.members.size();
            r.min_similarity = std::min(r.min_similarity, cls.min_similarity);
            r.max_similarity = std::max(r.max_similarity, cls.max_similarity);
            r.class_ids.push_back(cls.id);
        }
        std::vector<CategoryReport> out;
        for (auto& [cat, r] : by_cat) out.push_back(std::move(r));
        std::stable_sort(out.begin(), out.end(),
                         [](const auto& a, const auto& b) { return a.accumulated_size > b.accumulated_size; });
        return out;
    }

    const std::vector<CategoryRule>& rules() const { return rules_; }

private:
    std::vector<CategoryRule> rules_;
    const Corpus& corpus_;
    const FragmentStore& store_;
    const MetadataSidecar* sidecar_;
    int floor_;
};

} // namespace soliclone
