// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STIFFMOR_MODAL_PARTICIPATION_HPP
#define STIFFMOR_MODAL_PARTICIPATION_HPP

#include "stiffmor/modal/eigen.hpp"

namespace stiffmor
{

/// P(k, i) = [v_i]_k [y_i]_k: participation of state k in mode i.
struct ParticipationMatrix
{
    CMat raw;      ///< complex products; rows and columns sum to 1
    Mat magnitude; ///< |raw|, used for ranking

    Index states() const { return raw.rows(); }
    Index modes() const { return raw.cols(); }
};

inline ParticipationMatrix participation_matrix(const ModeBasis& basis)
{
    ParticipationMatrix p;
    p.raw = basis.left.cwiseProduct(basis.right);
    p.magnitude = p.raw.cwiseAbs();
    return p;
}

} // namespace stiffmor

#endif
