#include "openqmc/pairings.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace openqmc {

namespace {

void require_even(int m) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("pairings: point count must be even and at least 2");
  if (m > kMaxPoints) throw std::invalid_argument("pairings: point count too large");
}

void enumerate_rec(int m, std::vector<bool>& used, Pairing& cur, const std::function<void(const Pairing&)>& emit) {
  int first = 0;
  while (first < m && used[first]) ++first;
  if (first == m) {
    emit(cur);
    return;
  }
  used[first] = true;
  for (int k = first + 1; k < m; ++k) {
    if (used[k]) continue;
    used[k] = true;
    cur.emplace_back(first, k);
    enumerate_rec(m, used, cur, emit);
    cur.pop_back();
    used[k] = false;
  }
  used[first] = false;
}

template <class Keep>
PairingSet enumerate_filtered(int m, Keep keep) {
  require_even(m);
  PairingSet out(m);
  std::vector<bool> used(m, false);
  Pairing cur;
  enumerate_rec(m, used, cur, [&](const Pairing& p) {
    if (keep(p)) out.push(p);
  });
  return out;
}

}  // namespace

std::string to_string(PairingKind kind) {
  switch (kind) {
    case PairingKind::All: return "all";
    case PairingKind::Connected: return "connected";
    case PairingKind::BTB: return "btb";
  }
  return "?";
}

PairingKind parse_pairing_kind(const std::string& name) {
  if (name == "all") return PairingKind::All;
  if (name == "connected") return PairingKind::Connected;
  if (name == "btb") return PairingKind::BTB;
  throw std::invalid_argument("unknown pairing family '" + name + "'");
}

Pairing PairingSet::at(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("PairingSet::at");
  Pairing p;
  const std::uint8_t* q = idx_.data() + i * m_;
  for (int a = 0; a < m_ / 2; ++a) p.emplace_back(q[2 * a], q[2 * a + 1]);
  return p;
}

std::vector<Pairing> PairingSet::to_vector() const {
  std::vector<Pairing> v;
  v.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i));
  return v;
}

void PairingSet::push(const Pairing& p) {
  if (static_cast<int>(p.size()) * 2 != m_) throw std::invalid_argument("PairingSet: pairing size mismatch");
  for (auto [j, k] : p) {
    idx_.push_back(static_cast<std::uint8_t>(j));
    idx_.push_back(static_cast<std::uint8_t>(k));
    flat_.push_back(static_cast<std::uint8_t>(j * m_ + k));
  }
}

cplx PairingSet::sum_products(const cplx* corr) const {
  const int arcs = m_ / 2;
  const std::size_t n = size();
  const std::uint8_t* f = flat_.data();
  cplx total{};
  for (std::size_t i = 0; i < n; ++i, f += arcs) {
    cplx prod = corr[f[0]];
    for (int a = 1; a < arcs; ++a) prod *= corr[f[a]];
    total += prod;
  }
  return total;
}

bool is_connected(const Pairing& p) {
  const int n = static_cast<int>(p.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      auto [j1, k1] = p[a];
      auto [j2, k2] = p[b];
      if ((j1 < j2 && j2 < k1 && k1 < k2) || (j2 < j1 && j1 < k2 && k2 < k1)) parent[find(a)] = find(b);
    }
  }
  for (int a = 1; a < n; ++a)
    if (find(a) != find(0)) return false;
  return true;
}

bool is_btb_admissible(const Pairing& p, int m, int ell) {
  if (ell < 1 || ell > m) throw std::invalid_argument("pairings: ell out of range");
  std::array<int, kMaxPoints + 1> partner{};
  for (auto [j, k] : p) {
    partner[j + 1] = k + 1;
    partner[k + 1] = j + 1;
  }
  // Blocks [n1, n2] of 1-based indices lying strictly inside a bold section.
  auto closed_block = [&](int n1, int n2) {
    for (int x = n1; x <= n2; ++x)
      if (partner[x] < n1 || partner[x] > n2) return false;
    return true;
  };
  for (int n1 = 1; n1 <= m; ++n1) {
    for (int n2 = n1 + 1; n2 <= m; ++n2) {
      const bool left = n2 < ell - 1;
      const bool right = ell < n1 && n2 < m;
      if ((left || right) && closed_block(n1, n2)) return false;
    }
  }
  return true;
}

PairingSet enumerate_all(int m) {
  return enumerate_filtered(m, [](const Pairing&) { return true; });
}

PairingSet enumerate_connected(int m) {
  return enumerate_filtered(m, [](const Pairing& p) { return is_connected(p); });
}

PairingSet enumerate_btb(int m, int ell) {
  require_even(m);
  if (ell < 1 || ell > m) throw std::invalid_argument("pairings: ell out of range");
  return enumerate_filtered(m, [&](const Pairing& p) { return is_btb_admissible(p, m, ell); });
}

const PairingSet& pairing_table(const PairingFamily& family) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<PairingSet>> cache;
  const int ell = family.kind == PairingKind::BTB ? family.ell : 0;
  const auto key = std::make_tuple(static_cast<int>(family.kind), family.m, ell);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  PairingSet set;
  switch (family.kind) {
    case PairingKind::All: set = enumerate_all(family.m); break;
    case PairingKind::Connected: set = enumerate_connected(family.m); break;
    case PairingKind::BTB: set = enumerate_btb(family.m, family.ell); break;
  }
  auto [pos, _] = cache.emplace(key, std::make_unique<PairingSet>(std::move(set)));
  return *pos->second;
}

int btb_split_index(std::span<const double> points) {
  return 1 + static_cast<int>(std::count_if(points.begin(), points.end(), [](double s) { return s < 0.0; }));
}

cplx influence_functional(std::span<const double> points, const PairingFamily& family, const Correlation& corr) {
  const int n = static_cast<int>(points.size());
  if (!std::is_sorted(points.begin(), points.end()))
    throw std::invalid_argument("influence_functional: points must be sorted ascending");
  if (n % 2 != 0) return {};
  if (n == 0) return {1.0, 0.0};
  if (n != family.m) throw std::invalid_argument("influence_functional: point count does not match family");
  std::array<cplx, kMaxPoints * kMaxPoints> pair{};
  corr.pairwise(points.data(), n, pair.data());
  return pairing_table(family).sum_products(pair.data());
}

}  // namespace openqmc
