#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "openqmc/bath.hpp"

namespace openqmc {

// A perfect matching as (j, k) pairs of 0-based point indices, j < k.
using Pairing = std::vector<std::pair<int, int>>;

enum class PairingKind { All, Connected, BTB };

struct PairingFamily {
  PairingKind kind = PairingKind::All;
  int m = 2;    // number of points
  int ell = 1;  // BTB split index: 1 + number of strictly negative points
};

std::string to_string(PairingKind kind);
PairingKind parse_pairing_kind(const std::string& name);

// Immutable list of pairings over m points, stored flat.
class PairingSet {
 public:
  PairingSet() = default;
  explicit PairingSet(int m) : m_(m) {}

  int points() const { return m_; }
  std::size_t size() const { return m_ == 0 ? 0 : idx_.size() / static_cast<std::size_t>(m_); }
  Pairing at(std::size_t i) const;
  std::vector<Pairing> to_vector() const;

  void push(const Pairing& p);

  // Sum over pairings of the product of corr[j * m + k] over arcs.
  cplx sum_products(const cplx* corr) const;

 private:
  int m_ = 0;
  std::vector<std::uint8_t> idx_;   // j0 k0 j1 k1 ... per pairing
  std::vector<std::uint8_t> flat_;  // j * m + k per arc
};

PairingSet enumerate_all(int m);
PairingSet enumerate_connected(int m);
PairingSet enumerate_btb(int m, int ell);

bool is_connected(const Pairing& p);
bool is_btb_admissible(const Pairing& p, int m, int ell);

// Shared, lazily built table for a family; safe to call concurrently.
const PairingSet& pairing_table(const PairingFamily& family);

// 1 + number of strictly negative points.
int btb_split_index(std::span<const double> points);

// Sum over the family's pairings of the product of B over arcs; 0 for odd point counts.
cplx influence_functional(std::span<const double> points, const PairingFamily& family,
                          const Correlation& corr);

}  // namespace openqmc
