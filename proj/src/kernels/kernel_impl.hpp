#pragma once

#include "clab/kernels.hpp"

namespace clab::kernels::detail {

void eval_batch_scalar(const Tape& tape, std::size_t n, const double* eps,
                       bool eps_scalar, const double* const* vars,
                       const std::uint8_t* var_scalar, double* out);

void eval_batch_simd(const Tape& tape, std::size_t n, const double* eps,
                     bool eps_scalar, const double* const* vars,
                     const std::uint8_t* var_scalar, double* out);

}  // namespace clab::kernels::detail
