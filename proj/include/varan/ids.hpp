#pragma once

#include <cstdint>

namespace varan {

// Program variables and graph nodes are positive integers; source-level
// names live in side tables on the enclosing function.
using VarId = std::uint32_t;
using NodeId = std::uint32_t;

// Concrete memory block handles (functions, globals, stack frames).
using BlockId = std::uint32_t;

}  // namespace varan
