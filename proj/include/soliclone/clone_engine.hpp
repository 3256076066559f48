#pragma once

#include "soliclone/frontend.hpp"
#include "soliclone/normalizer.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace soliclone {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CloneConfig {
    NormalizationMode mode;
    int max_diff_threshold = 0; // percent
    FragmentWindow window;

    /// 0% for exact/renamed types, 30% for the near-miss types.
    static CloneConfig defaults_for(CloneType t) {
        const bool near_miss = t == CloneType::T3_1 || t == CloneType::T3_2c;
        return {NormalizationMode::for_type(t), near_miss ? 30 : 0, {}};
    }

    int min_similarity() const { return 100 - max_diff_threshold; }
};

/// Throws ConfigError for an inconsistent mode, a threshold outside 0..100,
/// a non-zero threshold on an exact/renamed type, or an empty size window.
inline void validate(const CloneConfig& cfg) {
    if (!cfg.mode.is_consistent())
        throw ConfigError("normalization mode does not match clone type " + std::string(to_string(cfg.mode.clone_type)));
    if (cfg.max_diff_threshold < 0 || cfg.max_diff_threshold > 100)
        throw ConfigError("threshold must be within 0..100");
    const bool near_miss = cfg.mode.clone_type == CloneType::T3_1 || cfg.mode.clone_type == CloneType::T3_2c;
    if (!near_miss && cfg.max_diff_threshold != 0)
        throw ConfigError("clone type " + std::string(to_string(cfg.mode.clone_type)) +
                          " admits only threshold 0; use t3-1 or t3-2c for near-miss detection");
    if (cfg.window.min_lines < 1 || cfg.window.min_lines > cfg.window.max_lines)
        throw ConfigError("size window requires 1 <= min-lines <= max-lines");
}

struct ClonePair {
    std::string a; // a < b
    std::string b;
    int similarity = 0;
    friend bool operator==(const ClonePair&, const ClonePair&) = default;
};

struct CloneClass {
    int id = 0; // 1-based, dense
    std::vector<std::string> members; // sorted
    int min_similarity = 100;
    int max_similarity = 0;
    std::size_t pair_count = 0;
    std::string representative;
    friend bool operator==(const CloneClass&, const CloneClass&) = default;
};

// ---------------------------------------------------------------------------
// Similarity
// ---------------------------------------------------------------------------

namespace detail {

/// Bit-parallel LCS over interned line ids. The shorter-or-equal sequence is
/// encoded once as per-symbol match masks and then scanned against others.
class LcsProfile {
public:
    LcsProfile() = default;

    explicit LcsProfile(std::span<const int> seq) : length_(seq.size()), words_((seq.size() + 63) / 64) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            auto& mask = masks_[seq[i]];
            if (mask.empty()) mask.assign(words_, 0);
            mask[i / 64] |= std::uint64_t{1} << (i % 64);
        }
    }

    std::size_t length() const { return length_; }

    std::size_t lcs(std::span<const int> other) const {
        if (length_ == 0) return 0;
        std::vector<std::uint64_t> v(words_, ~std::uint64_t{0});
        for (const int sym : other) {
            const auto it = masks_.find(sym);
            if (it == masks_.end()) continue;
            const auto& m = it->second;
            std::uint64_t carry = 0;
            for (std::size_t k = 0; k < words_; ++k) {
                const std::uint64_t u = v[k] & m[k];
                const std::uint64_t sum1 = v[k] + u;
                const std::uint64_t c1 = sum1 < v[k] ? 1 : 0;
                const std::uint64_t sum = sum1 + carry;
                const std::uint64_t c2 = sum < sum1 ? 1 : 0;
                carry = c1 | c2;
                v[k] = sum | (v[k] - u);
            }
        }
        std::size_t ones = 0;
        for (std::size_t k = 0; k < words_; ++k) {
            std::uint64_t w = v[k];
            if (k + 1 == words_ && length_ % 64 != 0) w &= (std::uint64_t{1} << (length_ % 64)) - 1;
            ones += static_cast<std::size_t>(std::popcount(w));
        }
        return length_ - ones;
    }

private:
    std::size_t length_ = 0;
    std::size_t words_ = 0;
    std::unordered_map<int, std::vector<std::uint64_t>> masks_;
};

inline int similarity_from_lcs(std::size_t lcs, std::size_t len_a, std::size_t len_b) {
    const std::size_t longest = std::max(len_a, len_b);
    return static_cast<int>((100 * lcs) / longest);
}

class LineInterner {
public:
    int intern(const std::string& line) {
        auto [it, inserted] = ids_.try_emplace(line, static_cast<int>(ids_.size()));
        return it->second;
    }
    std::vector<int> intern_all(std::span<const std::string> lines) {
        std::vector<int> out;
        out.reserve(lines.size());
        for (const auto& l : lines) out.push_back(intern(l));
        return out;
    }

private:
    std::unordered_map<std::string, int> ids_;
};

} // namespace detail

/// floor(100 * (1 - diff)) where diff is the larger of the two sides'
/// unshared-line fractions, lines being compared whole via LCS.
inline int similarity(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("similarity of an empty line list");
    detail::LineInterner interner;
    const auto ia = interner.intern_all(a);
    const auto ib = interner.intern_all(b);
    const auto& shorter = ia.size() <= ib.size() ? ia : ib;
    const auto& longer = ia.size() <= ib.size() ? ib : ia;
    const detail::LcsProfile profile(shorter);
    return detail::similarity_from_lcs(profile.lcs(longer), a.size(), b.size());
}

// ---------------------------------------------------------------------------
// Pair detection
// ---------------------------------------------------------------------------

struct DetectOptions {
    bool prefilter = true; // size-ratio and line-multiset bounds, exact-match hashing at 0%
    unsigned jobs = 0;     // 0 = hardware concurrency
};

namespace detail {

inline void sort_pairs(std::vector<ClonePair>& pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const ClonePair& x, const ClonePair& y) {
        if (x.similarity != y.similarity) return x.similarity > y.similarity;
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
}

inline ClonePair make_pair(const std::string& x, const std::string& y, int sim) {
    return x < y ? ClonePair{x, y, sim} : ClonePair{y, x, sim};
}

// Upper bound on LCS: size of the multiset intersection of two sorted id lists.
inline std::size_t multiset_overlap(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

} // namespace detail

/// Every unordered pair whose similarity reaches 100 - threshold, sorted by
/// similarity descending then by (a, b). Fragments with no normalized lines
/// are ignored. The result does not depend on `opts`.
inline std::vector<ClonePair> detect_pairs(const std::vector<NormalizedFragment>& frags, const CloneConfig& cfg,
                                           const DetectOptions& opts = {}) {
    const int min_sim = cfg.min_similarity();
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < frags.size(); ++i)
        if (!frags[i].norm_lines.empty()) live.push_back(i);

    std::vector<ClonePair> pairs;

    if (opts.prefilter && min_sim >= 100) {
        // Only identical line lists reach 100%.
        std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
        for (const auto i : live) groups[frags[i].norm_lines].push_back(i);
        for (const auto& [lines, members] : groups)
            for (std::size_t x = 0; x < members.size(); ++x)
                for (std::size_t y = x + 1; y < members.size(); ++y)
                    pairs.push_back(detail::make_pair(frags[members[x]].source, frags[members[y]].source, 100));
        detail::sort_pairs(pairs);
        return pairs;
    }

    detail::LineInterner interner;
    std::vector<std::vector<int>> seqs(frags.size());
    std::vector<std::vector<int>> sorted_seqs(frags.size());
    for (const auto i : live) {
        seqs[i] = interner.intern_all(frags[i].norm_lines);
        sorted_seqs[i] = seqs[i];
        std::sort(sorted_seqs[i].begin(), sorted_seqs[i].end());
    }
    // Ascending length: every candidate partner of live[x] sits at x+1.. and is
    // no shorter, so the size-ratio bound lets the inner scan stop early.
    std::stable_sort(live.begin(), live.end(),
                     [&](std::size_t x, std::size_t y) { return seqs[x].size() < seqs[y].size(); });

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs ? opts.jobs : hw, 64));
    std::vector<std::vector<ClonePair>> partial(jobs);

    auto worker = [&](unsigned w) {
        for (std::size_t x = w; x < live.size(); x += jobs) {
            const std::size_t i = live[x];
            const detail::LcsProfile profile(seqs[i]);
            const std::size_t short_len = seqs[i].size();
            for (std::size_t y = x + 1; y < live.size(); ++y) {
                const std::size_t j = live[y];
                const std::size_t long_len = seqs[j].size();
                if (opts.prefilter) {
                    if (100 * short_len < static_cast<std::size_t>(min_sim) * long_len) break;
                    const std::size_t bound = detail::multiset_overlap(sorted_seqs[i], sorted_seqs[j]);
                    if (100 * bound < static_cast<std::size_t>(min_sim) * long_len) continue;
                }
                const int sim = detail::similarity_from_lcs(profile.lcs(seqs[j]), short_len, long_len);
                if (sim >= min_sim) partial[w].push_back(detail::make_pair(frags[i].source, frags[j].source, sim));
            }
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }
    for (auto& p : partial) pairs.insert(pairs.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    detail::sort_pairs(pairs);
    return pairs;
}

// ---------------------------------------------------------------------------
// Classes
// ---------------------------------------------------------------------------

/// Connected components of the pair graph, found by breadth-first search.
/// Ids are assigned by member count descending, then smallest member id.
inline std::vector<CloneClass> build_classes(const std::vector<ClonePair>& pairs) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> names;
    auto node = [&](const std::string& id) {
        auto [it, inserted] = index.try_emplace(id, names.size());
        if (inserted) names.push_back(id);
        return it->second;
    };
    std::vector<std::vector<std::pair<std::size_t, int>>> adj;
    for (const auto& p : pairs) {
        const auto a = node(p.a);
        const auto b = node(p.b);
        adj.resize(names.size());
        adj[a].emplace_back(b, p.similarity);
        adj[b].emplace_back(a, p.similarity);
    }

    std::vector<CloneClass> classes;
    std::vector<bool> seen(names.size(), false);
    for (std::size_t start = 0; start < names.size(); ++start) {
        if (seen[start]) continue;
        CloneClass cls;
        std::size_t edge_ends = 0;
        std::deque<std::size_t> queue{start};
        seen[start] = true;
        while (!queue.empty()) {
            const auto n = queue.front();
            queue.pop_front();
            cls.members.push_back(names[n]);
            for (const auto& [m, sim] : adj[n]) {
                cls.min_similarity = std::min(cls.min_similarity, sim);
                cls.max_similarity = std::max(cls.max_similarity, sim);
                ++edge_ends;
                if (!seen[m]) {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        cls.pair_count = edge_ends / 2;
        std::sort(cls.members.begin(), cls.members.end());
        classes.push_back(std::move(cls));
    }
    std::sort(classes.begin(), classes.end(), [](const CloneClass& x, const CloneClass& y) {
        if (x.members.size() != y.members.size()) return x.members.size() > y.members.size();
        return x.members.front() < y.members.front();
    });
    for (std::size_t k = 0; k < classes.size(); ++k) classes[k].id = static_cast<int>(k + 1);
    return classes;
}

/// Read-only id -> Fragment lookup.
class FragmentStore {
public:
    FragmentStore() = default;
    explicit FragmentStore(std::vector<Fragment> frags) : frags_(std::move(frags)) {
        for (std::size_t i = 0; i < frags_.size(); ++i) index_.emplace(frags_[i].id, i);
    }

    const Fragment* find(const std::string& id) const {
        const auto it = index_.find(id);
        return it == index_.end() ? nullptr : &frags_[it->second];
    }
    const std::vector<Fragment>& all() const { return frags_; }

private:
    std::vector<Fragment> frags_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Member with the most original lines; ties go to the smallest id.
inline std::string select_representative(const CloneClass& cls, const FragmentStore& store) {
    if (cls.members.empty()) throw std::invalid_argument("empty clone class");
    std::string best;
    int best_len = -1;
    for (const auto& id : cls.members) {
        const Fragment* f = store.find(id);
        const int len = f ? f->line_count() : 0;
        if (len > best_len || (len == best_len && id < best)) {
            best = id;
            best_len = len;
        }
    }
    return best;
}

inline void assign_representatives(std::vector<CloneClass>& classes, const FragmentStore& store) {
    for (auto& c : classes) c.representative = select_representative(c, store);
}

} // namespace soliclone
