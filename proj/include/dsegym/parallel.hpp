#pragma once

namespace dsegym {

// Kernels that have an OpenMP path keep a plain serial loop next to it;
// both must produce identical results.
enum class Execution { kSerial, kParallel };

// Threads OpenMP would use for a parallel region (1 without OpenMP).
int max_threads() noexcept;

}  // namespace dsegym
