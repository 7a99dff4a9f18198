#include "finsler/jet.hpp"

#include <algorithm>
#include <functional>
#include <shared_mutex>

namespace finsler {

namespace {

// All exponent tuples over `vars` variables with total degree <= cap,
// ordered by total degree then lexicographically.
void enumerate_group(int vars, int cap, std::vector<std::vector<int>>& out) {
  std::vector<int> e(vars, 0);
  for (int degree = 0; degree <= cap; ++degree) {
    // lexicographic enumeration of compositions of `degree`
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == vars - 1) {
        e[pos] = remaining;
        out.push_back(e);
        return;
      }
      for (int d = 0; d <= remaining; ++d) {
        e[pos] = d;
        rec(pos + 1, remaining - d);
      }
    };
    if (vars == 0) {
      if (degree == 0) out.push_back(e);
    } else {
      rec(0, degree);
    }
  }
}

std::string layout_key(const std::vector<JetGroup>& groups) {
  std::string key;
  for (const auto& g : groups) {
    key += std::to_string(g.vars);
    key += ':';
    key += std::to_string(g.cap);
    key += ',';
  }
  return key;
}

}  // namespace

JetLayout::JetLayout(std::vector<JetGroup> groups) : groups_(std::move(groups)) {
  for (const auto& g : groups_) {
    if (g.vars < 0 || g.cap < 0) throw Error("JetLayout: negative group spec");
    nvars_ += g.vars;
    max_degree_ += g.cap;
  }

  // Per-group monomial lists, then the global tensor product.
  std::vector<std::vector<std::vector<int>>> group_monos(groups_.size());
  size_ = 1;
  for (size_t g = 0; g < groups_.size(); ++g) {
    enumerate_group(groups_[g].vars, groups_[g].cap, group_monos[g]);
    size_ *= static_cast<int>(group_monos[g].size());
  }

  var_group_.resize(nvars_);
  {
    int v = 0;
    for (size_t g = 0; g < groups_.size(); ++g)
      for (int i = 0; i < groups_[g].vars; ++i) var_group_[v++] = static_cast<int>(g);
  }

  exps_.assign(static_cast<size_t>(size_) * nvars_, 0);
  std::vector<int> gi(groups_.size(), 0);
  for (int m = 0; m < size_; ++m) {
    int offset = 0;
    for (size_t g = 0; g < groups_.size(); ++g) {
      const auto& e = group_monos[g][gi[g]];
      for (int i = 0; i < groups_[g].vars; ++i) exps_[m * nvars_ + offset + i] = e[i];
      offset += groups_[g].vars;
    }
    std::vector<int> full(exps_.begin() + m * nvars_, exps_.begin() + (m + 1) * nvars_);
    index_of_[full] = m;
    // advance the mixed-radix counter (group 0 fastest)
    for (size_t g = 0; g < groups_.size(); ++g) {
      if (++gi[g] < static_cast<int>(group_monos[g].size())) break;
      gi[g] = 0;
    }
  }

  linear_index_.resize(nvars_);
  for (int v = 0; v < nvars_; ++v) {
    std::vector<int> e(nvars_, 0);
    e[v] = 1;
    auto it = index_of_.find(e);
    linear_index_[v] = (it == index_of_.end() ? -1 : it->second);
  }

  mult_.assign(static_cast<size_t>(size_) * size_, -1);
  std::vector<int> sum(nvars_);
  for (int a = 0; a < size_; ++a) {
    for (int b = 0; b < size_; ++b) {
      bool ok = true;
      int offset = 0;
      for (size_t g = 0; g < groups_.size() && ok; ++g) {
        int total = 0;
        for (int i = 0; i < groups_[g].vars; ++i) {
          sum[offset + i] = exps_[a * nvars_ + offset + i] + exps_[b * nvars_ + offset + i];
          total += sum[offset + i];
        }
        if (total > groups_[g].cap) ok = false;
        offset += groups_[g].vars;
      }
      if (ok) mult_[static_cast<size_t>(a) * size_ + b] = index_of_.at(sum);
    }
  }
}

int JetLayout::monomial_index(const std::vector<int>& exps) const {
  auto it = index_of_.find(exps);
  return it == index_of_.end() ? -1 : it->second;
}

void JetLayout::build_derivative_maps() {
  deriv_.resize(nvars_);
  for (int v = 0; v < nvars_; ++v) {
    const int g = var_group_[v];
    if (groups_[g].cap == 0) continue;  // no first-order info in this group
    auto reduced = groups_;
    reduced[g].cap -= 1;
    DerivMap dm;
    dm.target = jet_layout(reduced);
    dm.source.resize(dm.target->size());
    dm.factor.resize(dm.target->size());
    for (int t = 0; t < dm.target->size(); ++t) {
      std::vector<int> e(dm.target->exponents(t), dm.target->exponents(t) + nvars_);
      e[v] += 1;
      dm.source[t] = index_of_.at(e);
      dm.factor[t] = e[v];
    }
    deriv_[v] = std::move(dm);
  }
}

const JetLayout::DerivMap& JetLayout::derivative_map(int var) const {
  const auto& dm = deriv_.at(var);
  return dm;
}

JetLayout::TruncMap JetLayout::truncation_map(const LayoutPtr& target) const {
  if (target->num_vars() != nvars_) throw Error("JetLayout: truncation across variable sets");
  TruncMap tm;
  tm.target = target;
  tm.source.resize(target->size());
  for (int t = 0; t < target->size(); ++t) {
    std::vector<int> e(target->exponents(t), target->exponents(t) + nvars_);
    auto it = index_of_.find(e);
    if (it == index_of_.end()) throw Error("JetLayout: truncation target exceeds caps");
    tm.source[t] = it->second;
  }
  return tm;
}

LayoutPtr jet_layout(const std::vector<JetGroup>& groups) {
  static std::shared_mutex mutex;
  static std::map<std::string, std::shared_ptr<JetLayout>> cache;
  const std::string key = layout_key(groups);
  {
    std::shared_lock lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  // Construct outside the lock; nested reduced-layout lookups re-enter this
  // function.  The first insertion for a key stays canonical, so every
  // pointer that escapes comes from the map and pointer-compares correctly.
  std::shared_ptr<JetLayout> layout(new JetLayout(groups));
  layout->build_derivative_maps();
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.emplace(key, layout);
  return it->second;
}

}  // namespace finsler
