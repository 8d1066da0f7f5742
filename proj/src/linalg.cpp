// SPDX-License-Identifier: Apache-2.0
//
// csimeta: knowledge-driven meta-learning toolkit for CSI feedback
// Copyright (C) 2026 The csimeta authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "csimeta/linalg.hpp"

#include "csimeta/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace csimeta
{

namespace
{

constexpr double pi = 3.14159265358979323846;
constexpr double pivot_tolerance = 1e-8;
constexpr double hermitian_tolerance = 1e-8;
constexpr int max_jacobi_sweeps = 64;
constexpr int max_power_iterations = 1000;

} // namespace

bool all_finite(const ComplexMatrix &m) noexcept
{
    for (Eigen::Index i = 0; i < m.size(); ++i)
    {
        const cplx z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            return false;
    }
    return true;
}

ComplexMatrix gram_schmidt(const ComplexMatrix &x)
{
    if (x.rows() != x.cols())
        throw Error(ErrorKind::ShapeMismatch, "gram_schmidt: matrix must be square");

    const Eigen::Index n = x.cols();
    ComplexMatrix u(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        ComplexVector v = x.col(k);
        // Two projection passes keep ||U^H U - I|| at rounding level even
        // for poorly conditioned draws.
        for (int pass = 0; pass < 2; ++pass)
        {
            for (Eigen::Index i = 0; i < k; ++i)
            {
                const cplx r = u.col(i).dot(v); // u_i^H v
                v -= r * u.col(i);
            }
        }
        const double pivot = v.norm();
        if (pivot <= pivot_tolerance)
            throw Error(ErrorKind::RankDeficient,
                        "gram_schmidt: pivot norm " + std::to_string(pivot) + " at column " + std::to_string(k));
        u.col(k) = v / pivot;
    }
    return u;
}

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b)
{
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

void apply_phase_convention(Eigen::Ref<ComplexVector> v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        const double mag = std::abs(v(i));
        if (mag > 1e-12)
        {
            const cplx rot = std::conj(v(i)) / mag;
            v *= rot;
            v(i) = cplx(std::abs(v(i)), 0.0);
            return;
        }
    }
}

EigenDecomposition hermitian_eig(const ComplexMatrix &a_in)
{
    if (a_in.rows() != a_in.cols())
        throw Error(ErrorKind::ShapeMismatch, "hermitian_eig: matrix must be square");

    const Eigen::Index n = a_in.rows();
    const double fro = a_in.norm();
    if (fro > 0.0)
    {
        const double skew = (a_in - a_in.adjoint()).norm() / fro;
        if (skew >= hermitian_tolerance)
            throw Error(ErrorKind::NotHermitian,
                        "hermitian_eig: relative anti-Hermitian part " + std::to_string(skew));
    }

    ComplexMatrix a = (a_in + a_in.adjoint()) * 0.5;
    ComplexMatrix v = ComplexMatrix::Identity(n, n);

    for (int sweep = 0; sweep < max_jacobi_sweeps; ++sweep)
    {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += std::norm(a(p, q));
        if (std::sqrt(2.0 * off) <= 1e-15 * fro || off == 0.0)
            break;

        for (Eigen::Index p = 0; p < n - 1; ++p)
        {
            for (Eigen::Index q = p + 1; q < n; ++q)
            {
                const double mag = std::abs(a(p, q));
                if (mag <= 1e-300)
                    continue;

                // Phase D = diag(1, e^{-i phi}) makes a_pq real, then a real
                // Jacobi rotation annihilates it. G = D R acts on columns p, q.
                const cplx phase = std::conj(a(p, q)) / mag; // e^{-i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                const cplx g_pp = c;
                const cplx g_pq = s;
                const cplx g_qp = -s * phase;
                const cplx g_qq = c * phase;

                // A <- A G (columns)
                for (Eigen::Index k = 0; k < n; ++k)
                {
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q);
                    a(k, p) = akp * g_pp + akq * g_qp;
                    a(k, q) = akp * g_pq + akq * g_qq;
                }
                // A <- G^H A (rows)
                for (Eigen::Index k = 0; k < n; ++k)
                {
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k);
                    a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
                    a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();

                for (Eigen::Index k = 0; k < n; ++k)
                {
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q);
                    v(k, p) = vkp * g_pp + vkq * g_qp;
                    v(k, q) = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src).real();
        ComplexVector col = v.col(src);
        apply_phase_convention(col);
        out.vectors.col(k) = col;
    }
    return out;
}

EigenPair top_eigvec(const ComplexMatrix &a)
{
    if (a.rows() != a.cols())
        throw Error(ErrorKind::ShapeMismatch, "top_eigvec: matrix must be square");

    const Eigen::Index n = a.rows();
    auto fallback = [&]() {
        EigenDecomposition full = hermitian_eig(a);
        EigenPair out;
        out.value = full.values(0);
        out.vector = full.vectors.col(0);
        return out;
    };

    // Start from the column with the largest norm: it lies in the range of A.
    Eigen::Index start = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j)
    {
        const double cn = a.col(j).squaredNorm();
        if (cn > best)
        {
            best = cn;
            start = j;
        }
    }
    if (best <= 0.0)
        return fallback();

    ComplexVector w = a.col(start) / std::sqrt(best);
    double lambda_prev = 0.0;
    for (int it = 0; it < max_power_iterations; ++it)
    {
        const ComplexVector y = a * w;
        const double lambda = w.dot(y).real();
        const double residual = (y - lambda * w).norm();
        if (lambda > 0.0 && residual <= 1e-11 * lambda && std::abs(lambda - lambda_prev) <= 1e-12 * lambda)
        {
            apply_phase_convention(w);
            return EigenPair{lambda, w};
        }
        const double yn = y.norm();
        if (yn == 0.0)
            break;
        w = y / yn;
        lambda_prev = lambda;
    }
    return fallback();
}

std::vector<ComplexMatrix> dft_delay_to_freq(std::span<const ComplexMatrix> taps, std::size_t n_sc)
{
    if (taps.size() > n_sc)
        throw Error(ErrorKind::DelayOverflow, "dft_delay_to_freq: " + std::to_string(taps.size()) +
                                                  " taps exceed " + std::to_string(n_sc) + " subcarriers");
    std::vector<ComplexMatrix> out;
    out.reserve(n_sc);
    if (taps.empty())
        return out;
    const Eigen::Index rows = taps.front().rows();
    const Eigen::Index cols = taps.front().cols();
    for (std::size_t k = 0; k < n_sc; ++k)
    {
        ComplexMatrix hk = ComplexMatrix::Zero(rows, cols);
        for (std::size_t d = 0; d < taps.size(); ++d)
        {
            // Reduce k*d mod n_sc before forming the angle to keep it small.
            const double angle = -2.0 * pi * static_cast<double>((k * d) % n_sc) / static_cast<double>(n_sc);
            hk += taps[d] * std::polar(1.0, angle);
        }
        out.push_back(std::move(hk));
    }
    return out;
}

ComplexMatrix complex_gaussian(RngStream &rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> dist(0.0, std::sqrt(0.5));
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i)
    {
        const double re = dist(rng);
        const double im = dist(rng);
        m.data()[i] = cplx(re, im);
    }
    return m;
}

} // namespace csimeta
