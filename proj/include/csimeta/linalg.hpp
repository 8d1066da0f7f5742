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

#pragma once

#include "csimeta/rng.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace csimeta
{

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

bool all_finite(const ComplexMatrix &m) noexcept;

// Modified Gram-Schmidt with one re-projection pass per column.
// Throws RankDeficient when a pivot norm drops to 1e-8 or below.
ComplexMatrix gram_schmidt(const ComplexMatrix &x);

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b);

struct EigenDecomposition
{
    RealVector values;     // descending
    ComplexMatrix vectors; // column k pairs with values(k)
};

// Cyclic complex Jacobi. The input is symmetrized as (A + A^H)/2 first;
// throws NotHermitian when ||A - A^H||_F / ||A||_F >= 1e-8.
EigenDecomposition hermitian_eig(const ComplexMatrix &a);

struct EigenPair
{
    double value = 0.0;
    ComplexVector vector;
};

// Dominant eigenpair of a Hermitian PSD matrix by power iteration, falling
// back to hermitian_eig when the iteration does not settle in 1000 steps.
EigenPair top_eigvec(const ComplexMatrix &a);

// Rotates v so that its first entry with magnitude > 1e-12 is real positive.
void apply_phase_convention(Eigen::Ref<ComplexVector> v);

// H~[k] = sum_d H[d] exp(-j 2 pi k d / n_sc), k = 0..n_sc-1.
std::vector<ComplexMatrix> dft_delay_to_freq(std::span<const ComplexMatrix> taps, std::size_t n_sc);

// i.i.d. CN(0, 1) entries (real and imaginary parts each N(0, 1/2)).
ComplexMatrix complex_gaussian(RngStream &rng, Eigen::Index rows, Eigen::Index cols);

} // namespace csimeta
