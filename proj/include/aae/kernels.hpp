#ifndef AAE_KERNELS_HPP
#define AAE_KERNELS_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Dense linear-algebra kernels used by the simulator.  Every kernel has a
// serial reference implementation and an OpenMP one; the dispatching wrappers
// pick the active backend at run time.  Reductions accumulate into a fixed
// number of chunks that are combined in index order, so results are bitwise
// identical across backends and thread counts.

namespace aae::kernels {

using cd = std::complex<double>;

enum class Backend { serial, openmp };

Backend active_backend();
void set_backend(Backend b);

namespace serial {
void matvec(const cd* a, const cd* x, cd* y, std::size_t n);
void matmul(const cd* a, const cd* b, cd* c, std::size_t n);
void apply_targeted(cd* amps, unsigned n_qubits, const cd* u,
                    std::span<const unsigned> targets,
                    std::span<const unsigned> controls);
double masked_norm2(const cd* v, std::size_t n, std::uint64_t mask,
                    std::uint64_t value);
cd vdot(const cd* a, const cd* b, std::size_t n);
double norm2(const cd* v, std::size_t n);
void reflect_about_state(cd* v, const cd* phi, std::size_t n);
void flip_sign_masked(cd* v, std::size_t n, std::uint64_t mask,
                      std::uint64_t value);
}  // namespace serial

namespace openmp {
void matvec(const cd* a, const cd* x, cd* y, std::size_t n);
void matmul(const cd* a, const cd* b, cd* c, std::size_t n);
void apply_targeted(cd* amps, unsigned n_qubits, const cd* u,
                    std::span<const unsigned> targets,
                    std::span<const unsigned> controls);
double masked_norm2(const cd* v, std::size_t n, std::uint64_t mask,
                    std::uint64_t value);
cd vdot(const cd* a, const cd* b, std::size_t n);
double norm2(const cd* v, std::size_t n);
void reflect_about_state(cd* v, const cd* phi, std::size_t n);
void flip_sign_masked(cd* v, std::size_t n, std::uint64_t mask,
                      std::uint64_t value);
}  // namespace openmp

// Dispatching wrappers.
void matvec(const cd* a, const cd* x, cd* y, std::size_t n);
void matmul(const cd* a, const cd* b, cd* c, std::size_t n);
void apply_targeted(cd* amps, unsigned n_qubits, const cd* u,
                    std::span<const unsigned> targets,
                    std::span<const unsigned> controls);
double masked_norm2(const cd* v, std::size_t n, std::uint64_t mask,
                    std::uint64_t value);
cd vdot(const cd* a, const cd* b, std::size_t n);
double norm2(const cd* v, std::size_t n);
// v <- v - 2 phi <phi|v>
void reflect_about_state(cd* v, const cd* phi, std::size_t n);
// v_i <- -v_i on every index with (i & mask) == value
void flip_sign_masked(cd* v, std::size_t n, std::uint64_t mask,
                      std::uint64_t value);

}  // namespace aae::kernels

#endif
