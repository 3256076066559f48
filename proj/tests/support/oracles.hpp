#pragma once

// Reference implementations used only by tests. Deliberately naive: they
// share no code with the library so a bug in one cannot hide in the other.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace oracle {

/// Textbook O(n*m) LCS length over whole lines.
inline std::size_t lcs_dp(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> dp(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1 : std::max(dp[i - 1][j], dp[i][j - 1]);
    return dp[a.size()][b.size()];
}

/// Similarity percent: 100 minus the larger unshared-line fraction, rounded down.
inline int similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t l = lcs_dp(a, b);
    const std::size_t longest = std::max(a.size(), b.size());
    return static_cast<int>((100 * l) / longest);
}

class UnionFind {
public:
    std::size_t id(const std::string& s) {
        auto [it, fresh] = index_.emplace(s, parent_.size());
        if (fresh) parent_.push_back(parent_.size());
        return it->second;
    }
    std::size_t root(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(const std::string& a, const std::string& b) {
        const auto ra = root(id(a)), rb = root(id(b));
        if (ra != rb) parent_[ra] = rb;
    }
    /// Components as sorted member sets, the whole collection sorted.
    std::set<std::set<std::string>> components() {
        std::map<std::size_t, std::set<std::string>> by_root;
        for (const auto& [name, i] : index_) by_root[root(i)].insert(name);
        std::set<std::set<std::string>> out;
        for (auto& [r, members] : by_root) out.insert(members);
        return out;
    }

private:
    std::map<std::string, std::size_t> index_;
    std::vector<std::size_t> parent_;
};

} // namespace oracle
