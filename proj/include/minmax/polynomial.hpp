// Sparse multivariate polynomials with exact differentiation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace minmax {

struct Term {
  double coeff = 0.0;
  std::vector<int> exps;  // one entry per variable, >= 0
};

// A polynomial in `nvars` variables stored as a canonical term list:
// terms sorted by exponent vector, no duplicates, no zero coefficients.
class SparsePolynomial {
 public:
  SparsePolynomial() = default;
  explicit SparsePolynomial(int nvars) : nvars_(nvars) {
    if (nvars < 1) throw std::invalid_argument("SparsePolynomial: nvars must be >= 1");
  }
  SparsePolynomial(int nvars, std::vector<Term> terms) : nvars_(nvars), terms_(std::move(terms)) {
    if (nvars < 1) throw std::invalid_argument("SparsePolynomial: nvars must be >= 1");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const Term& t = terms_[i];
      if (static_cast<int>(t.exps.size()) != nvars_)
        throw std::invalid_argument("SparsePolynomial: term " + std::to_string(i) +
                                    " has exponent vector of length " +
                                    std::to_string(t.exps.size()) + ", expected " +
                                    std::to_string(nvars_));
      for (int e : t.exps)
        if (e < 0)
          throw std::invalid_argument("SparsePolynomial: term " + std::to_string(i) +
                                      " has a negative exponent");
    }
    canonicalize();
    build_eval_cache();
  }

  int nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const Term& t : terms_) {
      int td = 0;
      for (int e : t.exps) td += e;
      d = std::max(d, td);
    }
    return d;
  }

  double evaluate(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != nvars_)
      throw std::invalid_argument("SparsePolynomial::evaluate: point dimension mismatch");
    double acc = 0.0;
    for (const CompiledTerm& t : compiled_) {
      double v = t.coeff;
      for (const auto& [var, exp] : t.factors) {
        double p = point[var];
        double q = p;
        for (int k = 1; k < exp; ++k) q *= p;
        v *= q;
      }
      acc += v;
    }
    return acc;
  }

  SparsePolynomial derivative(int var) const {
    if (var < 0 || var >= nvars_) throw std::invalid_argument("derivative: variable out of range");
    std::vector<Term> out;
    for (const Term& t : terms_) {
      if (t.exps[var] == 0) continue;
      Term d = t;
      d.coeff *= t.exps[var];
      d.exps[var] -= 1;
      out.push_back(std::move(d));
    }
    return SparsePolynomial(nvars_, std::move(out));
  }

  SparsePolynomial operator+(const SparsePolynomial& o) const {
    require_same_arity(o);
    std::vector<Term> out = terms_;
    out.insert(out.end(), o.terms_.begin(), o.terms_.end());
    return SparsePolynomial(nvars_, std::move(out));
  }

  SparsePolynomial operator*(const SparsePolynomial& o) const {
    require_same_arity(o);
    std::vector<Term> out;
    out.reserve(terms_.size() * o.terms_.size());
    for (const Term& a : terms_)
      for (const Term& b : o.terms_) {
        Term p;
        p.coeff = a.coeff * b.coeff;
        p.exps.resize(nvars_);
        for (int v = 0; v < nvars_; ++v) p.exps[v] = a.exps[v] + b.exps[v];
        out.push_back(std::move(p));
      }
    return SparsePolynomial(nvars_, std::move(out));
  }

  SparsePolynomial scaled(double c) const {
    std::vector<Term> out = terms_;
    for (Term& t : out) t.coeff *= c;
    return SparsePolynomial(nvars_, std::move(out));
  }

  bool operator==(const SparsePolynomial& o) const {
    if (nvars_ != o.nvars_ || terms_.size() != o.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (terms_[i].coeff != o.terms_[i].coeff || terms_[i].exps != o.terms_[i].exps) return false;
    return true;
  }

  static SparsePolynomial constant(int nvars, double c) {
    Term t;
    t.coeff = c;
    t.exps.assign(nvars, 0);
    return SparsePolynomial(nvars, {t});
  }

  static SparsePolynomial variable(int nvars, int var) {
    Term t;
    t.coeff = 1.0;
    t.exps.assign(nvars, 0);
    t.exps.at(var) = 1;
    return SparsePolynomial(nvars, {t});
  }

 private:
  void require_same_arity(const SparsePolynomial& o) const {
    if (nvars_ != o.nvars_)
      throw std::invalid_argument("SparsePolynomial: arity mismatch");
  }

  void canonicalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.exps < b.exps; });
    std::vector<Term> merged;
    for (Term& t : terms_) {
      if (!merged.empty() && merged.back().exps == t.exps)
        merged.back().coeff += t.coeff;
      else
        merged.push_back(std::move(t));
    }
    std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
    terms_ = std::move(merged);
  }

  // Evaluation skips zero exponents; terms are precompiled to (var, exp) pairs.
  struct CompiledTerm {
    double coeff;
    std::vector<std::pair<int, int>> factors;
  };

  void build_eval_cache() {
    compiled_.clear();
    compiled_.reserve(terms_.size());
    for (const Term& t : terms_) {
      CompiledTerm c;
      c.coeff = t.coeff;
      for (int v = 0; v < nvars_; ++v)
        if (t.exps[v] > 0) c.factors.emplace_back(v, t.exps[v]);
      compiled_.push_back(std::move(c));
    }
  }

  int nvars_ = 1;
  std::vector<Term> terms_;
  std::vector<CompiledTerm> compiled_;
};

}  // namespace minmax
