#pragma once

#include <algorithm>
#include <tuple>
#include <utility>

#include "zvl/grid.hpp"

namespace zvl {

struct ZakharovState {
  ComplexField u;
  RealField n;
  RealField v;
  double t = 0.0;
};

/// u is complex so that phase-carrying solitary waves fit; real data stays real.
struct KGZState {
  ComplexField u;
  ComplexField ut;
  RealField n;
  RealField v;
  double t = 0.0;
};

struct NLSState {
  ComplexField u;
  double t = 0.0;
};

inline auto fields(ZakharovState& s) { return std::tie(s.u, s.n, s.v); }
inline auto fields(const ZakharovState& s) { return std::tie(s.u, s.n, s.v); }
inline auto fields(KGZState& s) { return std::tie(s.u, s.ut, s.n, s.v); }
inline auto fields(const KGZState& s) { return std::tie(s.u, s.ut, s.n, s.v); }
inline auto fields(NLSState& s) { return std::tie(s.u); }
inline auto fields(const NLSState& s) { return std::tie(s.u); }

inline ZakharovState zero_zakharov(const Grid& g) {
  return {ComplexField(g.size()), RealField(g.size()), RealField(g.size()), 0.0};
}

inline KGZState zero_kgz(const Grid& g) {
  return {ComplexField(g.size()), ComplexField(g.size()), RealField(g.size()), RealField(g.size()),
          0.0};
}

inline NLSState zero_nls(const Grid& g) { return {ComplexField(g.size()), 0.0}; }

template <class Field>
struct ParityParts {
  Field even;
  Field odd;
};

template <class Field>
ParityParts<Field> parity_decompose(const Field& f, const Grid& g) {
  g.check(f.size());
  ParityParts<Field> p{Field(f.size()), Field(f.size())};
  for (int j = 0; j < g.size(); ++j) {
    const auto r = f[g.reflect(j)];
    p.even[j] = 0.5 * (f[j] + r);
    p.odd[j] = f[j] - p.even[j];
  }
  return p;
}

namespace detail {

template <class Field>
double wrong_parity_ratio(const Field& f, const Grid& g, bool want_odd) {
  const auto p = parity_decompose(f, g);
  const double wrong = l2_norm(want_odd ? p.even : p.odd, g);
  return wrong / std::max(l2_norm(f, g), 1e-30);
}

}  // namespace detail

/// Worst relative wrong-parity content for the sector u odd, n even, v odd.
inline double parity_violation(const ZakharovState& s, const Grid& g) {
  return std::max({detail::wrong_parity_ratio(s.u, g, true),
                   detail::wrong_parity_ratio(s.n, g, false),
                   detail::wrong_parity_ratio(s.v, g, true)});
}

inline double parity_violation(const KGZState& s, const Grid& g) {
  return std::max({detail::wrong_parity_ratio(s.u, g, true),
                   detail::wrong_parity_ratio(s.ut, g, true),
                   detail::wrong_parity_ratio(s.n, g, false),
                   detail::wrong_parity_ratio(s.v, g, true)});
}

inline double parity_violation(const NLSState& s, const Grid& g) {
  return detail::wrong_parity_ratio(s.u, g, true);
}

}  // namespace zvl
