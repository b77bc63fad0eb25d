#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mlbgg::ops
{

using Exponent = std::int64_t;
using Monomial = std::pair<Exponent, Exponent>;

/*!
 * Sparse bivariate coefficient table.
 *
 * Serves both as a finitely supported sequence f(x, y) and as a polynomial
 * in the formal variables (u, v). Keys are kept sorted, zero coefficients
 * are never stored.
 */
template<class T = double>
class Bivariate
{
  public:
    using value_type = T;
    using storage_type = std::map<Monomial, T>;

    Bivariate() = default;

    Bivariate(std::initializer_list<std::pair<Monomial const, T>> terms)
    {
        for (auto const& [key, c] : terms)
        {
            add(key.first, key.second, c);
        }
    }

    static Bivariate point(Exponent x, Exponent y, T c = T(1))
    {
        Bivariate out;
        out.add(x, y, c);
        return out;
    }

    /// Coefficient at (x, y); zero when absent.
    T operator()(Exponent x, Exponent y) const
    {
        auto const it = terms_.find({x, y});
        return it == terms_.end() ? T(0) : it->second;
    }

    void add(Exponent x, Exponent y, T c)
    {
        if (x < 0 || y < 0)
        {
            throw ParameterError("bivariate exponents must be nonnegative");
        }
        if (c == T(0))
        {
            return;
        }
        auto [it, inserted] = terms_.try_emplace({x, y}, c);
        if (!inserted)
        {
            it->second += c;
            if (it->second == T(0))
            {
                terms_.erase(it);
            }
        }
    }

    bool empty() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    auto begin() const noexcept { return terms_.begin(); }
    auto end() const noexcept { return terms_.end(); }

    Exponent max_x() const noexcept
    {
        Exponent m = 0;
        for (auto const& [key, c] : terms_)
        {
            m = std::max(m, key.first);
        }
        return m;
    }

    Exponent max_y() const noexcept
    {
        Exponent m = 0;
        for (auto const& [key, c] : terms_)
        {
            m = std::max(m, key.second);
        }
        return m;
    }

    Bivariate& operator+=(Bivariate const& rhs)
    {
        for (auto const& [key, c] : rhs.terms_)
        {
            add(key.first, key.second, c);
        }
        return *this;
    }

    friend Bivariate operator+(Bivariate lhs, Bivariate const& rhs)
    {
        lhs += rhs;
        return lhs;
    }

    friend Bivariate operator*(T a, Bivariate const& f)
    {
        Bivariate out;
        for (auto const& [key, c] : f.terms_)
        {
            out.add(key.first, key.second, a * c);
        }
        return out;
    }

    /// Full polynomial product.
    friend Bivariate operator*(Bivariate const& lhs, Bivariate const& rhs)
    {
        Bivariate out;
        for (auto const& [ka, a] : lhs.terms_)
        {
            for (auto const& [kb, b] : rhs.terms_)
            {
                out.add(ka.first + kb.first, ka.second + kb.second, a * b);
            }
        }
        return out;
    }

    friend bool operator==(Bivariate const&, Bivariate const&) = default;

  private:
    storage_type terms_;
};

/// A finitely supported sequence {f(x, y)}.
template<class T = double>
using BivariateSeq = Bivariate<T>;

/// Image of a sequence under the forward operator: a polynomial in (u, v).
template<class T = double>
using TransformPoly = Bivariate<T>;

/// Per-row (m_l, n_l) extraction indices for the vectorized inverse.
using IndexMatrix = std::vector<std::pair<Exponent, Exponent>>;

/*!
 * Forward operator: (1 - u)(1 - v) * sum_{x,y} f(x, y) u^x v^y.
 *
 * Exact; the result has degree at most (max_x + 1, max_y + 1).
 */
template<class T>
TransformPoly<T> transform_d(BivariateSeq<T> const& f)
{
    TransformPoly<T> out;
    for (auto const& [key, c] : f)
    {
        auto const [x, y] = key;
        out.add(x, y, c);
        out.add(x + 1, y, -c);
        out.add(x, y + 1, -c);
        out.add(x + 1, y + 1, c);
    }
    return out;
}

/*!
 * Inverse operator at (m, n).
 *
 * The normalized mixed derivative at the origin of G / ((1-u)(1-v)) is the
 * (m, n) coefficient of that power series. Since 1/((1-u)(1-v)) expands to
 * sum u^i v^j, the coefficient is the rectangular prefix sum of G's
 * coefficients over a <= m, b <= n. Negative indices give 0.
 */
template<class T>
T inverse_d(TransformPoly<T> const& g, Exponent m, Exponent n)
{
    if (m < 0 || n < 0)
    {
        return T(0);
    }
    T sum(0);
    for (auto const& [key, c] : g)
    {
        if (key.first <= m && key.second <= n)
        {
            sum += c;
        }
    }
    return sum;
}

/// Elementwise forward operator over a function vector, order preserved.
template<class T>
std::vector<TransformPoly<T>> matrix_transform(std::vector<BivariateSeq<T>> const& fs)
{
    if (fs.empty())
    {
        throw DimensionError("matrix_transform: empty function vector");
    }
    std::vector<TransformPoly<T>> out;
    out.reserve(fs.size());
    for (auto const& f : fs)
    {
        out.push_back(transform_d(f));
    }
    return out;
}

/// Row l of the result is inverse_d(gs[l], m_l, n_l).
template<class T>
std::vector<T> matrix_inverse(std::vector<TransformPoly<T>> const& gs, IndexMatrix const& rows)
{
    if (gs.size() != rows.size())
    {
        throw DimensionError("matrix_inverse: " + std::to_string(gs.size())
                             + " polynomials but " + std::to_string(rows.size())
                             + " index rows");
    }
    std::vector<T> out;
    out.reserve(gs.size());
    for (std::size_t l = 0; l < gs.size(); ++l)
    {
        out.push_back(inverse_d(gs[l], rows[l].first, rows[l].second));
    }
    return out;
}

/// Canonical text dump, terms sorted by (deg_u, deg_v): "c*u^a*v^b + ...".
template<class T>
std::string to_string(Bivariate<T> const& p)
{
    if (p.empty())
    {
        return "0";
    }
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (auto const& [key, c] : p)
    {
        if (!first)
        {
            os << " + ";
        }
        first = false;
        os << c << "*u^" << key.first << "*v^" << key.second;
    }
    return os.str();
}

} // namespace mlbgg::ops
