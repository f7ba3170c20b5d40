// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "faa/nn.hpp"

namespace faa {

/// First and second order feature statistics of one user's device data.
struct UserImpression {
  int user_id = 0;
  std::size_t n = 0;
  Vector mu;
  Matrix sigma;
  /// Only the diagonal of sigma is meaningful (and transmitted).
  bool diagonal = false;

  Eigen::Index dim() const { return mu.size(); }

  /// Throws InputError unless n >= 1, shapes agree, sigma is symmetric
  /// within 1e-9 and values are finite.
  void validate() const;
};

}  // namespace faa
