#ifndef MOMLAB_TPM_HPP
#define MOMLAB_TPM_HPP

#include <cstdint>
#include <string>

#include "momlab/rng.hpp"

namespace momlab::tpm {

// Simulation cap. A capped run is reported, never silently passed.
inline constexpr long kStepCap = 10'000'000;

enum class Mode { TwoSided, SumForm, Momentum };

// One quadratic-growth instance.
//
// two-sided:  z <- z + c_t z^2 with c_t in [lower_coef, upper_coef]
// sum-form:   z(t) = z0 + A * sum_{s<t} z(s)^2 - C  (adversarial low band)
// momentum:   G <- gamma G - alpha3 c^2,  c <- c - eta G
// All sequences grow until they reach `upsilon`.
struct QuadraticSequenceSpec {
  Mode mode = Mode::TwoSided;
  double z0 = 0.0;       // initial value (c^(0) in momentum mode)
  double upsilon = 0.0;  // target level

  double lower_coef = 0.0;  // m (two-sided)
  double upper_coef = 0.0;  // M (two-sided)

  double A = 0.0;  // sum-form growth coefficient
  double C = 0.0;  // sum-form band half-width, requires C <= z0/2

  double eta = 0.0;     // momentum step size
  double gamma = 0.0;   // momentum factor, in (0, 1)
  double alpha3 = 0.0;  // momentum growth coefficient

  void validate() const;
};

struct HitResult {
  long steps = 0;
  bool capped = false;
};

enum class StepRule { LowerCoef, UpperCoef, RandomInRange };

// First t with z^(t) >= upsilon for the two-sided recursion, using the
// chosen coefficient selector.
HitResult simulate_hitting_time(const QuadraticSequenceSpec& spec, StepRule rule,
                                Rng* rng = nullptr);

// Closed-form GD bound: 3/(m z0) + (8M/m) ceil(log(upsilon/z0)/log 2).
double bound_gd(const QuadraticSequenceSpec& spec);

// Worst-case-down trajectory of the sum recursion (C subtracted at every
// evaluation) and its bound 8 ceil(log(upsilon/z0)/log 2) + 21/(z0 A).
HitResult simulate_sum_form(const QuadraticSequenceSpec& spec);
double bound_sum(const QuadraticSequenceSpec& spec);

// Momentum recursion hitting time and the bound
//   (1/(1-gamma)) ceil(log(upsilon)/log(1+delta))
//     + (1+delta)/(eta (1-e^-1) alpha3 c0),
// evaluated exactly as printed. A variant replacing log(upsilon) with
// log(upsilon/c0) is also available; the checker flags instances where
// only the variant holds.
HitResult simulate_momentum(const QuadraticSequenceSpec& spec);
double bound_momentum(const QuadraticSequenceSpec& spec, double delta);
double bound_momentum_ratio_variant(const QuadraticSequenceSpec& spec, double delta);

struct MomentumCheck {
  long steps = 0;
  bool capped = false;
  double best_delta = 0.0;       // delta giving the smallest printed bound
  double best_bound = 0.0;
  bool passes_printed = false;   // sim <= printed bound for some delta
  bool passes_variant = false;   // sim <= log(upsilon/c0) variant for some delta
  bool flagged = false;          // only the variant holds
};
// Grids delta over {0.1, ..., 0.9}.
MomentumCheck check_momentum(const QuadraticSequenceSpec& spec);

// Simulates x <- x - A x^2 from x0 (requires A*x0 <= 1) and verifies
// x^(t) <= 1/(A (t - t_offset)) for every t > t_offset.
struct SublinearResult {
  bool ok = false;
  double max_ratio = 0.0;  // max of x(t) * A * (t - t_offset)
};
SublinearResult check_sublinear(double A, long t_offset, double x0, long steps);

// Batch interface: reads a JSON array of specs, writes one report entry
// per spec with the simulated time, the bound and the verdict. Returns
// the number of failed entries.
int run_batch_file(const std::string& spec_path, const std::string& report_path);
std::string builtin_battery_report(std::uint64_t seed, int per_mode);

}  // namespace momlab::tpm

#endif  // MOMLAB_TPM_HPP
