#ifndef NVSINGLET_EXEC_HPP
#define NVSINGLET_EXEC_HPP

namespace nvs {

// Execution policy for the scan kernels. Serial is the reference path kept
// for testing; Parallel uses OpenMP. Both must produce identical results.
enum class Exec { Serial, Parallel };

}  // namespace nvs

#endif
