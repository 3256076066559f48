#pragma once

#include "soliclone/cluster_analyzer.hpp"
#include "soliclone/frontend.hpp"
#include "soliclone/normalizer.hpp"

#include "json.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace soliclone {

enum class RelationKind { Generalization, Using, Dependency };

inline std::string_view to_string(RelationKind k) {
    switch (k) {
    case RelationKind::Generalization: return "generalization";
    case RelationKind::Using: return "using";
    case RelationKind::Dependency: return "dependency";
    }
    return "dependency";
}

struct Attribute {
    std::string name;
    std::string type; // raw type text
    friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Operation {
    std::string signature;
    Visibility visibility = Visibility::Unspecified;
    friend bool operator==(const Operation&, const Operation&) = default;
};

struct Entity {
    std::string name;
    DeclKind kind = DeclKind::Contract;
    bool external = false; // referenced but not declared in the unit
    std::vector<Attribute> attributes;
    std::vector<Operation> operations;
    friend bool operator==(const Entity&, const Entity&) = default;
};

struct Relation {
    std::string from;
    std::string to;
    RelationKind kind = RelationKind::Dependency;
    friend auto operator<=>(const Relation&, const Relation&) = default;
};

struct StructuralModel {
    DomainCategory category = DomainCategory::Uncategorized;
    std::string root;
    std::vector<Entity> entities;    // sorted by name
    std::vector<Relation> relations; // sorted

    const Entity* find(std::string_view name) const {
        for (const auto& e : entities)
            if (e.name == name) return &e;
        return nullptr;
    }
    friend bool operator==(const StructuralModel&, const StructuralModel&) = default;
};

struct SharedEntity {
    std::string name;
    std::vector<DomainCategory> categories; // ascending
    friend bool operator==(const SharedEntity&, const SharedEntity&) = default;
};

struct CrossRef {
    DomainCategory first;
    DomainCategory second; // first < second
    std::string via;
    friend bool operator==(const CrossRef&, const CrossRef&) = default;
};

struct MetaModel {
    std::vector<StructuralModel> models; // by category
    std::vector<SharedEntity> shared_entities;
    std::vector<CrossRef> cross_refs;
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Contract-like names referenced by a type text, e.g. "IERC20" in
// "mapping(address => IERC20)". Elementary types, user structs/enums and
// qualified member types are skipped.
inline std::vector<std::string> referenced_types(const std::string& type_text, const ParsedUnit& unit) {
    std::vector<std::string> out;
    std::vector<Token> toks;
    try {
        toks = tokenize(type_text);
    } catch (const LexError&) {
        return out;
    }
    const auto& keep = PreservedTokens::defaults();
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.kind != TokenKind::Identifier || keep.contains(t.text)) continue;
        if ((i > 0 && toks[i - 1].text == ".") || (i + 1 < toks.size() && toks[i + 1].text == ".")) continue;
        if (unit.user_types.count(t.text)) continue;
        out.push_back(t.text);
    }
    return out;
}

inline Entity entity_from(const ContractDecl& decl) {
    Entity e{decl.name, decl.kind, false, {}, {}};
    for (const auto& v : decl.state_vars) e.attributes.push_back({v.name, v.type});
    for (const auto& fn : decl.functions) e.operations.push_back({display_signature(fn), fn.visibility});
    return e;
}

} // namespace detail

/// Structural model of `root` and everything it inherits or uses within the
/// unit. Bases become generalization edges, using-for becomes using edges,
/// and contract types named by state variables or parameters become
/// dependency edges. Targets not declared in the unit are external entities.
inline StructuralModel extract_model(const ParsedUnit& unit, const std::string& root, DomainCategory category) {
    const ContractDecl* root_decl = nullptr;
    for (const auto& d : unit.declarations)
        if (d.name == root) root_decl = &d;
    if (!root_decl) {
        std::string names;
        for (const auto& d : unit.declarations) names += (names.empty() ? "" : ", ") + d.name;
        throw ModelError("unknown root contract '" + root + "' in " + unit.source.path +
                         "; available: " + (names.empty() ? "<none>" : names));
    }

    std::map<std::string, Entity> entities;
    std::set<Relation> relations;
    auto declared = [&](const std::string& name) -> const ContractDecl* {
        for (const auto& d : unit.declarations)
            if (d.name == name) return &d;
        return nullptr;
    };
    auto add_target = [&](const std::string& name) {
        if (entities.count(name)) return;
        if (const auto* d = declared(name)) entities.emplace(name, detail::entity_from(*d));
        else entities.emplace(name, Entity{name, DeclKind::Contract, true, {}, {}});
    };

    std::deque<const ContractDecl*> queue{root_decl};
    std::set<std::string> expanded;
    while (!queue.empty()) {
        const ContractDecl* decl = queue.front();
        queue.pop_front();
        if (!expanded.insert(decl->name).second) continue;
        entities.insert_or_assign(decl->name, detail::entity_from(*decl));

        auto follow = [&](const std::string& target, RelationKind kind) {
            if (target.empty() || target == decl->name) return;
            add_target(target);
            relations.insert({decl->name, target, kind});
            if (const auto* d = declared(target); d && !expanded.count(target)) queue.push_back(d);
        };
        for (const auto& base : decl->bases) follow(base, RelationKind::Generalization);
        for (const auto& u : decl->usings)
            if (!u.library.empty() && u.library.front() != '{') follow(u.library, RelationKind::Using);

        std::set<std::string> deps;
        for (const auto& v : decl->state_vars)
            for (auto& n : detail::referenced_types(v.type, unit)) deps.insert(n);
        for (const auto& fn : decl->functions)
            for (const auto& p : fn.params)
                for (auto& n : detail::referenced_types(p.type, unit)) deps.insert(n);
        for (const auto& dep : deps) {
            if (dep == decl->name) continue;
            const bool linked = relations.count({decl->name, dep, RelationKind::Generalization}) ||
                                relations.count({decl->name, dep, RelationKind::Using});
            if (linked) continue;
            add_target(dep);
            relations.insert({decl->name, dep, RelationKind::Dependency});
        }
    }

    StructuralModel model;
    model.category = category;
    model.root = root;
    for (auto& [name, e] : entities) model.entities.push_back(std::move(e));
    model.relations.assign(relations.begin(), relations.end());
    return model;
}

/// Models are kept as given (sorted by category); entities with the same
/// name in two or more models are shared, and every pair of categories
/// sharing one gets a cross reference.
inline MetaModel merge_models(std::vector<StructuralModel> models) {
    std::set<DomainCategory> seen;
    for (const auto& m : models) {
        if (m.category == DomainCategory::Uncategorized)
            throw std::invalid_argument("merge_models: Uncategorized models are not merged");
        if (!seen.insert(m.category).second)
            throw std::invalid_argument("merge_models: duplicate category " + std::string(to_string(m.category)));
    }
    std::sort(models.begin(), models.end(), [](const auto& a, const auto& b) { return a.category < b.category; });

    std::map<std::string, std::set<DomainCategory>> owners;
    for (const auto& m : models)
        for (const auto& e : m.entities) owners[e.name].insert(m.category);

    MetaModel meta;
    for (const auto& [name, cats] : owners) {
        if (cats.size() < 2) continue;
        meta.shared_entities.push_back({name, {cats.begin(), cats.end()}});
    }
    for (const auto& shared : meta.shared_entities) {
        const auto& c = shared.categories;
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j) meta.cross_refs.push_back({c[i], c[j], shared.name});
    }
    std::sort(meta.cross_refs.begin(), meta.cross_refs.end(), [](const CrossRef& a, const CrossRef& b) {
        return std::tie(a.first, a.second, a.via) < std::tie(b.first, b.second, b.via);
    });
    meta.models = std::move(models);
    return meta;
}

// ---------------------------------------------------------------------------
// DOT
// ---------------------------------------------------------------------------

namespace detail {

inline std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

// Escapes record-label metacharacters; the result is embedded in a quoted
// string, so quotes and backslashes are escaped too.
inline std::string record_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '{': case '}': case '|': case '<': case '>': case '"': case '\\': out += '\\'; break;
        default: break;
        }
        out += c;
    }
    return out;
}

inline std::string_view visibility_symbol(Visibility v) {
    switch (v) {
    case Visibility::Public:
    case Visibility::External: return "+";
    case Visibility::Internal: return "#";
    case Visibility::Private: return "-";
    case Visibility::Unspecified: return "~";
    }
    return "~";
}

inline std::string record_label(const Entity& e) {
    std::string label = "{";
    if (e.kind != DeclKind::Contract) label += "\\<\\<" + std::string(to_string(e.kind)) + "\\>\\>\\n";
    label += record_escape(e.name) + "|";
    for (const auto& a : e.attributes) label += record_escape(a.name + " : " + a.type) + "\\l";
    label += "|";
    for (const auto& o : e.operations)
        label += record_escape(std::string(visibility_symbol(o.visibility)) + o.signature) + "\\l";
    return label + "}";
}

inline std::string edge_attrs(RelationKind k) {
    switch (k) {
    case RelationKind::Generalization: return "[arrowhead=empty]";
    case RelationKind::Using: return "[style=dashed, arrowhead=open, label=\"using\"]";
    case RelationKind::Dependency: return "[style=dashed, arrowhead=vee]";
    }
    return "";
}

inline void write_model_body(std::ostringstream& os, const StructuralModel& m, const std::string& prefix,
                             const std::string& indent) {
    for (const auto& e : m.entities) {
        os << indent << dot_quote(prefix + e.name) << " [label=\"" << record_label(e) << "\"";
        if (e.external) os << ", style=dashed";
        os << "];\n";
    }
    for (const auto& r : m.relations)
        os << indent << dot_quote(prefix + r.from) << " -> " << dot_quote(prefix + r.to) << " " << edge_attrs(r.kind)
           << ";\n";
}

inline const char* kDotPreamble =
    "  node [shape=record, fontname=\"Helvetica\", fontsize=10];\n"
    "  edge [fontname=\"Helvetica\", fontsize=9];\n";

} // namespace detail

/// Byte-stable DOT: one record node per entity (name, attributes,
/// operations), sorted by name; relations sorted by endpoints.
inline std::string render_dot(const StructuralModel& m) {
    std::ostringstream os;
    os << "digraph " << detail::dot_quote(std::string(to_string(m.category))) << " {\n";
    os << "  graph [rankdir=BT];\n" << detail::kDotPreamble;
    detail::write_model_body(os, m, "", "  ");
    os << "}\n";
    return os.str();
}

/// One cluster per category model; node ids are "<Category>/<Entity>".
/// Shared entities are joined across clusters by dotted undirected edges.
inline std::string render_dot(const MetaModel& meta) {
    std::ostringstream os;
    os << "digraph \"MetaModel\" {\n";
    os << "  graph [rankdir=BT, compound=true];\n" << detail::kDotPreamble;
    for (const auto& m : meta.models) {
        const std::string cat(to_string(m.category));
        os << "  subgraph " << detail::dot_quote("cluster_" + cat) << " {\n";
        os << "    label=" << detail::dot_quote(cat) << ";\n";
        detail::write_model_body(os, m, cat + "/", "    ");
        os << "  }\n";
    }
    for (const auto& x : meta.cross_refs) {
        os << "  " << detail::dot_quote(std::string(to_string(x.first)) + "/" + x.via) << " -> "
           << detail::dot_quote(std::string(to_string(x.second)) + "/" + x.via)
           << " [style=dotted, dir=none, label=\"shared\"];\n";
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const StructuralModel& m) {
    nlohmann::json entities = nlohmann::json::array();
    for (const auto& e : m.entities) {
        nlohmann::json attrs = nlohmann::json::array();
        for (const auto& a : e.attributes) attrs.push_back({{"name", a.name}, {"type", a.type}});
        nlohmann::json ops = nlohmann::json::array();
        for (const auto& o : e.operations)
            ops.push_back({{"signature", o.signature}, {"visibility", std::string(to_string(o.visibility))}});
        entities.push_back({{"name", e.name},
                            {"kind", std::string(to_string(e.kind))},
                            {"external", e.external},
                            {"attributes", attrs},
                            {"operations", ops}});
    }
    nlohmann::json rels = nlohmann::json::array();
    for (const auto& r : m.relations)
        rels.push_back({{"from", r.from}, {"to", r.to}, {"kind", std::string(to_string(r.kind))}});
    return {{"category", std::string(to_string(m.category))},
            {"root", m.root},
            {"entities", entities},
            {"relations", rels}};
}

inline nlohmann::json to_json(const MetaModel& meta) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : meta.models) models.push_back(to_json(m));
    nlohmann::json shared = nlohmann::json::array();
    for (const auto& s : meta.shared_entities) {
        nlohmann::json cats = nlohmann::json::array();
        for (auto c : s.categories) cats.push_back(std::string(to_string(c)));
        shared.push_back({{"name", s.name}, {"categories", cats}});
    }
    nlohmann::json refs = nlohmann::json::array();
    for (const auto& x : meta.cross_refs)
        refs.push_back({{"first", std::string(to_string(x.first))},
                        {"second", std::string(to_string(x.second))},
                        {"via", x.via}});
    return {{"models", models}, {"shared_entities", shared}, {"cross_refs", refs}};
}

} // namespace soliclone
