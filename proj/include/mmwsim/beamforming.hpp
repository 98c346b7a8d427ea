// SPDX-License-Identifier: Apache-2.0
//
// mmwsim: system-level simulator for multi-layer hybrid beamforming in mmWave cells
// Copyright (C) 2026 The mmwsim Authors
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

#ifndef MMWSIM_BEAMFORMING_HPP
#define MMWSIM_BEAMFORMING_HPP

#include "mmwsim/array_geometry.hpp"

#include <string>
#include <vector>

namespace mmwsim::bf
{

using array::BeamVector;
using array::Codebook;

enum class BfKind
{
    gbf,
    cbf,
    fmbf,
    smbf,
};

const char *to_string(BfKind kind);
BfKind parse_bf_kind(const std::string &name);

/// FMBF and SMBF build on CBF analog beams.
inline bool is_mmse(BfKind kind) { return kind == BfKind::fmbf || kind == BfKind::smbf; }

struct BfScheme
{
    BfKind kind = BfKind::cbf;
    int reference_subcarrier = 1650;
};

struct BeamPair
{
    BeamVector v; // BS side
    BeamVector w; // UE side
};

/// Conjugated array responses at the line-of-sight angles of both ends.
BeamPair gbf_pair(const Vec3 &bs_pos, const Vec3 &ue_pos, const array::ArrayConfig &bs_array,
                  const array::ArrayConfig &ue_array);

struct CbfChoice
{
    BeamVector v;
    BeamVector w;
    int tx_index = 0;
    int rx_index = 0;
    double power = 0.0; // |w^T H v|^2
};

/// Exhaustive max-power search over B_D x B_A on the reference-subcarrier
/// matrix; ties go to the lowest (tx, rx) index pair.
CbfChoice cbf_select(const ComplexMatrix &h_ref, const Codebook &bs_book, const Codebook &ue_book);

/// Same search given the full gain table gains(rx, tx) = w_rx^T H v_tx.
CbfChoice cbf_select_from_gains(const ComplexMatrix &gains, const Codebook &bs_book, const Codebook &ue_book);

/// Reference equivalent channel. Entry (u, p) = sqrt(L_u) h_eq[u, p]; row u
/// holds user u's own measurements against every port p.
struct EquivalentChannel
{
    ComplexMatrix matrix;
    std::vector<int> users;
};

/// `measurements(u, p)` is h_eq[u, p] at one subcarrier; NaN marks a missing
/// measurement and raises an error naming the pair.
EquivalentChannel build_equivalent(const ComplexMatrix &measurements, const std::vector<double> &pathloss,
                                   const std::vector<int> &users = {});

struct PrecodingMatrix
{
    ComplexMatrix matrix; // N_p x N_u
    bool per_subcarrier = false;
};

/// V = H^H (H H^H + s I)^-1 with s = noise_over_power.
PrecodingMatrix mmse_precoder(const EquivalentChannel &h_eq, double noise_over_power);

/// UL MMSE combiner in the transpose formulation: with G = H_eq^T the
/// receive filter is (G G^H + s I)^-1 G, applied as c^T y, so the combining
/// weights are its conjugate. By the push-through identity this equals the
/// DL precoder.
PrecodingMatrix mmse_combiner(const EquivalentChannel &h_eq, double noise_over_power);

/// v_u = normalize(sum_p analog_p V[p, u]).
std::vector<BeamVector> effective_vectors(const std::vector<BeamVector> &analog, const PrecodingMatrix &v);

/// Column norms |sum_p analog_p V[p, u]| computed in port space from the Gram
/// matrix A^H A of the analog beams, without forming antenna vectors.
Eigen::VectorXd effective_norms(const ComplexMatrix &analog_gram, const ComplexMatrix &v);

/// Heap-free storage for groups of up to 8 users.
constexpr int kSmallGroup = 8;
using SmallMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kSmallGroup, kSmallGroup>;

/// Normalised MMSE weights W = V diag(1 / |effective beam|) for an already
/// pathloss-scaled equivalent channel. Same numbers as mmse_precoder then
/// effective_norms. Needs noise_over_power > 0; returns false when a layer's
/// effective beam norm falls below 1e-12.
bool normalised_mmse(const SmallMatrix &h_scaled, const SmallMatrix &analog_gram, double noise_over_power,
                     SmallMatrix &w);

/// Per-subcarrier MMSE: one precoder per measurement matrix.
std::vector<PrecodingMatrix> smbf_precoders(const std::vector<ComplexMatrix> &per_subcarrier,
                                            const std::vector<double> &pathloss, double noise_over_power);

/// Per-subcarrier effective vector sets built from smbf_precoders.
std::vector<std::vector<BeamVector>> smbf_effective_vectors(const std::vector<BeamVector> &analog,
                                                            const std::vector<PrecodingMatrix> &precoders);

struct FeedbackBudget
{
    int n_bit = 32; // bits per real component
    int n_users = 4;
    int subcarriers = 3300;
    int codebook_size = 64;
};

/// Each complex coefficient costs 2 N_bit (real and imaginary part).
/// FMBF: N_u^2 coefficients; SMBF: K N_u^2; GBF: 0; CBF: N_u ceil(log2 |B_D|).
long long feedback_bits(const FeedbackBudget &budget, BfKind kind);

} // namespace mmwsim::bf

#endif
