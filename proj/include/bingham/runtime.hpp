#pragma once

#include <cstdlib>
#include <unistd.h>

namespace bingham {

/// OpenBLAS' runtime CPU detection picks broken kernels on some virtualized
/// hosts, which silently corrupts the dense kernels inside UMFPACK. The core
/// type is read once when the library is loaded, so the only reliable fix
/// from inside the process is to set it and re-exec. Call first thing in
/// main(); a no-op when OPENBLAS_CORETYPE is already set.
inline void pin_blas_core_type(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  if (::setenv("OPENBLAS_CORETYPE", "Haswell", 0) != 0) return;
  ::execv("/proc/self/exe", argv);
  // execv only returns on failure; carry on with the detected kernels.
}

}  // namespace bingham
