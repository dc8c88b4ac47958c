#pragma once

#include "advgeo/simd/kernels.hpp"

namespace advgeo::simd::detail {

const KernelTable& scalar_kernels();
#if defined(ADVGEO_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

}  // namespace advgeo::simd::detail
