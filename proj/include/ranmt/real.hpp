#pragma once

namespace ranmt {

// The numeric core is compiled twice: float for training (target ranmt_num)
// and double for the finite-difference gradient checks (target ranmt_num64).
// A binary links exactly one of the two.
#ifdef RANMT_REAL64
using real_t = double;
#else
using real_t = float;
#endif

}  // namespace ranmt
