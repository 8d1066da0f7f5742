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

// Independent reference implementations used only by the tests. They trade
// speed for obviousness and share no code with the library kernels.
#pragma once

#include "csimeta/linalg.hpp"
#include "csimeta/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle
{

using csimeta::ComplexMatrix;
using csimeta::ComplexVector;
using csimeta::cplx;

// Eigen's own Hermitian solver, ascending order flipped to descending.
struct Eig
{
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
};

inline Eig eigen_solver(const ComplexMatrix &a)
{
    Eigen::MatrixXcd m = a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    Eig out;
    const Eigen::Index n = m.rows();
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    (void)n;
    return out;
}

// Random Hermitian PSD matrix A = X X^H / cols with a std::mt19937 source.
inline ComplexMatrix random_psd(std::mt19937_64 &gen, int n, int cols)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXcd x(n, cols);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < cols; ++j)
            x(i, j) = cplx(nd(gen), nd(gen));
    Eigen::MatrixXcd a = x * x.adjoint() / static_cast<double>(cols);
    return ComplexMatrix(a);
}

inline ComplexMatrix random_complex(std::mt19937_64 &gen, int rows, int cols)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    ComplexMatrix x(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            x(i, j) = cplx(nd(gen), nd(gen));
    return x;
}

// |a^H b|^2 / (|a|^2 |b|^2)
inline double cos2(const ComplexVector &a, const ComplexVector &b)
{
    return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

// Direct double loop over taps and subcarriers.
inline std::vector<ComplexMatrix> naive_dft(const std::vector<ComplexMatrix> &taps, int n_sc)
{
    std::vector<ComplexMatrix> out;
    for (int k = 0; k < n_sc; ++k)
    {
        ComplexMatrix acc = ComplexMatrix::Zero(taps[0].rows(), taps[0].cols());
        for (std::size_t d = 0; d < taps.size(); ++d)
        {
            const double ang = -2.0 * std::numbers::pi * k * static_cast<double>(d) / n_sc;
            acc += taps[d] * cplx(std::cos(ang), std::sin(ang));
        }
        out.push_back(acc);
    }
    return out;
}

inline ComplexMatrix naive_kron(const ComplexMatrix &a, const ComplexMatrix &b)
{
    ComplexMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index p = 0; p < b.rows(); ++p)
                for (Eigen::Index q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
    return k;
}

inline double unitarity_error(const ComplexMatrix &u)
{
    return (u.adjoint() * u - ComplexMatrix::Identity(u.cols(), u.cols())).norm();
}

// Subband SGCS written out with explicit loops.
inline double naive_sgcs(const ComplexMatrix &w, const ComplexMatrix &v)
{
    double total = 0.0;
    for (Eigen::Index l = 0; l < w.cols(); ++l)
    {
        cplx ip = 0.0;
        double nw = 0.0, nv = 0.0;
        for (Eigen::Index t = 0; t < w.rows(); ++t)
        {
            ip += std::conj(w(t, l)) * v(t, l);
            nw += std::norm(w(t, l));
            nv += std::norm(v(t, l));
        }
        total += std::norm(ip) / (nw * nv);
    }
    return total / static_cast<double>(w.cols());
}

// Upper tail of the chi-square distribution via the regularized gamma
// series/continued fraction (Numerical-Recipes style, independent of Boost).
inline double chi2_sf(double x, double k)
{
    const double a = k / 2.0, z = x / 2.0;
    if (z <= 0.0)
        return 1.0;
    const double lg = std::lgamma(a);
    if (z < a + 1.0)
    {
        double sum = 1.0 / a, term = sum;
        for (int n = 1; n < 1000; ++n)
        {
            term *= z / (a + n);
            sum += term;
            if (std::abs(term) < 1e-15 * std::abs(sum))
                break;
        }
        return 1.0 - sum * std::exp(-z + a * std::log(z) - lg);
    }
    double b = z + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 1000; ++i)
    {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300)
            d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300)
            c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15)
            break;
    }
    return std::exp(-z + a * std::log(z) - lg) * h;
}

} // namespace oracle
