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

#include "mmwsim/beamforming.hpp"

#include <Eigen/SVD>

#include <cctype>

namespace mmwsim::bf
{

const char *to_string(BfKind kind)
{
    switch (kind)
    {
    case BfKind::gbf:
        return "GBF";
    case BfKind::cbf:
        return "CBF";
    case BfKind::fmbf:
        return "FMBF";
    case BfKind::smbf:
        return "SMBF";
    }
    return "?";
}

BfKind parse_bf_kind(const std::string &name)
{
    std::string up;
    for (char c : name)
        up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "GBF")
        return BfKind::gbf;
    if (up == "CBF")
        return BfKind::cbf;
    if (up == "FMBF")
        return BfKind::fmbf;
    if (up == "SMBF")
        return BfKind::smbf;
    throw Error(ErrorCode::config, "unknown beamforming scheme '" + name + "'");
}

BeamPair gbf_pair(const Vec3 &bs_pos, const Vec3 &ue_pos, const array::ArrayConfig &bs_array,
                  const array::ArrayConfig &ue_array)
{
    const auto p = array::geometric_angles(bs_pos, ue_pos);
    return {array::array_response(bs_array, p.departure).conjugate(),
            array::array_response(ue_array, p.arrival).conjugate()};
}

CbfChoice cbf_select_from_gains(const ComplexMatrix &gains, const Codebook &bs_book, const Codebook &ue_book)
{
    if (bs_book.size() == 0 || ue_book.size() == 0)
        throw Error(ErrorCode::invalid_argument, "cbf_select needs non-empty codebooks");
    if (gains.rows() != static_cast<Eigen::Index>(ue_book.size()) ||
        gains.cols() != static_cast<Eigen::Index>(bs_book.size()))
        throw Error(ErrorCode::invalid_argument, "cbf gain table does not match the codebook sizes");

    CbfChoice best;
    best.power = -1.0;
    // tx-major scan with strict improvement keeps the lexicographic tie rule
    for (Eigen::Index t = 0; t < gains.cols(); ++t)
    {
        for (Eigen::Index r = 0; r < gains.rows(); ++r)
        {
            const double p = std::norm(gains(r, t));
            if (p > best.power)
            {
                best.power = p;
                best.tx_index = static_cast<int>(t);
                best.rx_index = static_cast<int>(r);
            }
        }
    }
    best.v = bs_book.beams[static_cast<std::size_t>(best.tx_index)];
    best.w = ue_book.beams[static_cast<std::size_t>(best.rx_index)];
    return best;
}

CbfChoice cbf_select(const ComplexMatrix &h_ref, const Codebook &bs_book, const Codebook &ue_book)
{
    if (bs_book.size() == 0 || ue_book.size() == 0)
        throw Error(ErrorCode::invalid_argument, "cbf_select needs non-empty codebooks");
    const auto n_rx = h_ref.rows();
    const auto n_tx = h_ref.cols();
    if (ue_book.beams[0].size() != n_rx || bs_book.beams[0].size() != n_tx)
        throw Error(ErrorCode::invalid_argument, "codebook beam length does not match the channel matrix");

    ComplexMatrix w(n_rx, static_cast<Eigen::Index>(ue_book.size()));
    ComplexMatrix v(n_tx, static_cast<Eigen::Index>(bs_book.size()));
    for (std::size_t i = 0; i < ue_book.size(); ++i)
        w.col(static_cast<Eigen::Index>(i)) = ue_book.beams[i];
    for (std::size_t i = 0; i < bs_book.size(); ++i)
        v.col(static_cast<Eigen::Index>(i)) = bs_book.beams[i];
    const ComplexMatrix gains = w.transpose() * h_ref * v;
    return cbf_select_from_gains(gains, bs_book, ue_book);
}

EquivalentChannel build_equivalent(const ComplexMatrix &measurements, const std::vector<double> &pathloss,
                                   const std::vector<int> &users)
{
    const auto n = measurements.rows();
    if (static_cast<Eigen::Index>(pathloss.size()) != n)
        throw Error(ErrorCode::invalid_argument, "one pathloss value per measuring user is required");
    EquivalentChannel out;
    out.matrix.resize(n, measurements.cols());
    for (Eigen::Index u = 0; u < n; ++u)
    {
        const double s = std::sqrt(pathloss[static_cast<std::size_t>(u)]);
        for (Eigen::Index p = 0; p < measurements.cols(); ++p)
        {
            const Complex m = measurements(u, p);
            if (std::isnan(m.real()) || std::isnan(m.imag()))
                throw Error(ErrorCode::invalid_argument, "missing measurement for user " + std::to_string(u) +
                                                             ", port " + std::to_string(p));
            out.matrix(u, p) = s * m;
        }
    }
    if (users.empty())
    {
        for (Eigen::Index u = 0; u < n; ++u)
            out.users.push_back(static_cast<int>(u));
    }
    else
    {
        if (static_cast<Eigen::Index>(users.size()) != n)
            throw Error(ErrorCode::invalid_argument, "user id list does not match the measurement rows");
        out.users = users;
    }
    return out;
}

namespace
{

ComplexMatrix regularised_inverse_apply(const ComplexMatrix &gram, const ComplexMatrix &rhs, double s)
{
    const auto n = gram.rows();
    const ComplexMatrix reg = gram + s * ComplexMatrix::Identity(n, n);
    if (s == 0.0)
    {
        Eigen::JacobiSVD<ComplexMatrix> svd(reg);
        const auto sv = svd.singularValues();
        const double smax = sv.size() ? sv[0] : 0.0;
        const double smin = sv.size() ? sv[sv.size() - 1] : 0.0;
        if (!(smin > 0.0) || smax / smin > 1e12)
            throw Error(ErrorCode::runtime, "rank-deficient zero-noise MMSE");
    }
    return reg.partialPivLu().solve(rhs);
}

} // namespace

PrecodingMatrix mmse_precoder(const EquivalentChannel &h_eq, double noise_over_power)
{
    if (!(noise_over_power >= 0.0))
        throw Error(ErrorCode::invalid_argument, "noise_over_power must be >= 0");
    const ComplexMatrix &h = h_eq.matrix;
    // V = H^H G^-1 with G Hermitian, so V^H = G^-1 H
    const ComplexMatrix gram = h * h.adjoint();
    PrecodingMatrix out;
    out.matrix = regularised_inverse_apply(gram, h, noise_over_power).adjoint();
    return out;
}

PrecodingMatrix mmse_combiner(const EquivalentChannel &h_eq, double noise_over_power)
{
    if (!(noise_over_power >= 0.0))
        throw Error(ErrorCode::invalid_argument, "noise_over_power must be >= 0");
    const ComplexMatrix g = h_eq.matrix.transpose();
    const ComplexMatrix gram = g * g.adjoint();
    PrecodingMatrix out;
    out.matrix = regularised_inverse_apply(gram, g, noise_over_power).conjugate();
    return out;
}

std::vector<BeamVector> effective_vectors(const std::vector<BeamVector> &analog, const PrecodingMatrix &v)
{
    if (static_cast<Eigen::Index>(analog.size()) != v.matrix.rows())
        throw Error(ErrorCode::invalid_argument, "analog beam count does not match the precoder rows");
    std::vector<BeamVector> out;
    if (analog.empty())
        return out;
    const auto n = analog.front().size();
    for (Eigen::Index u = 0; u < v.matrix.cols(); ++u)
    {
        BeamVector acc = BeamVector::Zero(n);
        for (std::size_t p = 0; p < analog.size(); ++p)
            acc += analog[p] * v.matrix(static_cast<Eigen::Index>(p), u);
        const double norm = acc.norm();
        if (!(norm > 0.0))
            throw Error(ErrorCode::runtime, "null effective beam for layer " + std::to_string(u));
        out.push_back(acc / norm);
    }
    return out;
}

Eigen::VectorXd effective_norms(const ComplexMatrix &analog_gram, const ComplexMatrix &v)
{
    Eigen::VectorXd out(v.cols());
    for (Eigen::Index u = 0; u < v.cols(); ++u)
    {
        const Complex q = (v.col(u).adjoint() * analog_gram * v.col(u))(0, 0);
        out[u] = std::sqrt(std::max(q.real(), 0.0));
    }
    return out;
}

bool normalised_mmse(const SmallMatrix &h_scaled, const SmallMatrix &analog_gram, double noise_over_power,
                     SmallMatrix &w)
{
    if (!(noise_over_power > 0.0))
        throw Error(ErrorCode::invalid_argument, "normalised_mmse needs noise_over_power > 0");
    const auto n = h_scaled.rows();
    SmallMatrix reg = h_scaled * h_scaled.adjoint();
    reg.diagonal().array() += noise_over_power;
    const SmallMatrix vh = reg.llt().solve(h_scaled);
    w = vh.adjoint();
    for (Eigen::Index u = 0; u < w.cols(); ++u)
    {
        const Complex q = w.col(u).dot(analog_gram * w.col(u));
        const double norm = std::sqrt(std::max(q.real(), 0.0));
        if (norm < 1e-12)
            return false;
        w.col(u) /= norm;
    }
    return n > 0;
}

std::vector<PrecodingMatrix> smbf_precoders(const std::vector<ComplexMatrix> &per_subcarrier,
                                            const std::vector<double> &pathloss, double noise_over_power)
{
    std::vector<PrecodingMatrix> out;
    out.reserve(per_subcarrier.size());
    for (const auto &m : per_subcarrier)
    {
        auto p = mmse_precoder(build_equivalent(m, pathloss), noise_over_power);
        p.per_subcarrier = true;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::vector<BeamVector>> smbf_effective_vectors(const std::vector<BeamVector> &analog,
                                                            const std::vector<PrecodingMatrix> &precoders)
{
    std::vector<std::vector<BeamVector>> out;
    out.reserve(precoders.size());
    for (const auto &p : precoders)
        out.push_back(effective_vectors(analog, p));
    return out;
}

long long feedback_bits(const FeedbackBudget &budget, BfKind kind)
{
    if (budget.n_bit < 1 || budget.n_users < 0 || budget.subcarriers < 1)
        throw Error(ErrorCode::invalid_argument, "invalid feedback budget");
    // N_bit is spent on each real component, two per complex coefficient
    const long long nu2 = 2LL * budget.n_users * budget.n_users;
    switch (kind)
    {
    case BfKind::gbf:
        return 0;
    case BfKind::cbf: {
        long long bits = 0;
        while ((1LL << bits) < budget.codebook_size)
            ++bits;
        return budget.n_users * bits;
    }
    case BfKind::fmbf:
        return nu2 * budget.n_bit;
    case BfKind::smbf:
        return static_cast<long long>(budget.subcarriers) * nu2 * budget.n_bit;
    }
    return 0;
}

} // namespace mmwsim::bf
