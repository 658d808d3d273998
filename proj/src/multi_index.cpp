#include "chc/multi_index.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace chc {

namespace {

constexpr int kPackBase = kMaxOrder + 1;

int pack(const Exponents& e, int dim) {
  int key = 0;
  for (int i = dim - 1; i >= 0; --i) key = key * kPackBase + e[i];
  return key;
}

int pack_size(int dim) {
  int n = 1;
  for (int i = 0; i < dim; ++i) n *= kPackBase;
  return n;
}

// All multi-indices of the given total degree, lexicographically descending
// (leftmost variable largest first) so the degree-1 block is x_0, x_1, ...
void enumerate_degree(int dim, int deg, std::vector<Exponents>& out) {
  Exponents e{};
  auto rec = [&](auto&& self, int var, int remaining) -> void {
    if (var == dim - 1) {
      e[var] = static_cast<std::uint8_t>(remaining);
      out.push_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[var] = static_cast<std::uint8_t>(k);
      self(self, var + 1, remaining - k);
    }
  };
  rec(rec, 0, deg);
}

}  // namespace

IndexTable::IndexTable(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("IndexTable: dim out of range");
  if (order < 0 || order > kMaxOrder) throw std::invalid_argument("IndexTable: order out of range");

  offsets_.assign(order + 2, 0);
  for (int deg = 0; deg <= order; ++deg) {
    offsets_[deg] = static_cast<int>(exps_.size());
    enumerate_degree(dim, deg, exps_);
  }
  offsets_[order + 1] = static_cast<int>(exps_.size());

  const int n = size();
  degree_.resize(n);
  lookup_.assign(pack_size(dim), -1);
  for (int p = 0; p < n; ++p) {
    int d = 0;
    for (int i = 0; i < dim; ++i) d += exps_[p][i];
    degree_[p] = static_cast<std::uint8_t>(d);
    lookup_[pack(exps_[p], dim)] = p;
  }

  down_.assign(n * dim, -1);
  up_.assign(n * dim, -1);
  for (int p = 0; p < n; ++p) {
    for (int v = 0; v < dim; ++v) {
      Exponents e = exps_[p];
      if (e[v] > 0) {
        --e[v];
        down_[p * dim + v] = lookup_[pack(e, dim)];
        ++e[v];
      }
      if (degree_[p] < order) {
        ++e[v];
        up_[p * dim + v] = lookup_[pack(e, dim)];
      }
    }
  }

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (degree_[a] + degree_[b] > order) continue;
      Exponents e;
      for (int i = 0; i < dim; ++i) e[i] = static_cast<std::uint8_t>(exps_[a][i] + exps_[b][i]);
      for (int i = dim; i < kMaxDim; ++i) e[i] = 0;
      mul_.push_back({a, b, lookup_[pack(e, dim)]});
    }
  }
}

int IndexTable::position(const Exponents& e) const {
  int deg = 0;
  for (int i = 0; i < dim_; ++i) deg += e[i];
  if (deg > order_) return -1;
  return lookup_[pack(e, dim_)];
}

const IndexTable& IndexTable::get(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, const IndexTable*> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, new IndexTable(dim, order)).first;
  }
  return *it->second;
}

}  // namespace chc
