#pragma once

#include <cstddef>
#include <cstdint>

namespace distmin {

// Library-wide scalar field. Selected at configure time with
// -DDISTMIN_SINGLE_PRECISION=ON; 64-bit otherwise.
#if defined(DISTMIN_SINGLE_PRECISION)
using Scalar = float;
#else
using Scalar = double;
#endif

inline constexpr std::uint32_t kScalarWidth = sizeof(Scalar);

}  // namespace distmin
