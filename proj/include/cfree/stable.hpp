#pragma once

#include <functional>
#include <string_view>

#include "cfree/convolution.hpp"
#include "cfree/infdiv.hpp"

namespace cfree {

/// Analytic maps of the upper half-plane into the closed lower half-plane
/// that solve φ(z) + φ(az)/a = φ(bz)/b + c:
///   constant:    a + ib,            a real, b ≤ 0
///   power_high:  a + b z^{1−α},     a real, α ∈ (1, 2], b ≠ 0, arg b ∈ [(α − 2)π, 0]
///   power_low:   a + b z^{1−α},     a real, α ∈ (0, 1), b ≠ 0, arg b ∈ [−π, (α − 1)π]
///   log:         a + b log z,       Im a ≤ 0, b < 0
/// Powers and logarithms take the principal branch.
enum class StableFamily { Constant, PowerHigh, PowerLow, Log };

StableFamily parse_stable_family(std::string_view name);
std::string_view stable_family_name(StableFamily f);

struct StableFunction {
  StableFamily family = StableFamily::Constant;
  cplx a{0.0, 0.0};
  cplx b{0.0, 0.0};
  double alpha = 2.0;
};

/// Validates the family constraints and probes Im φ ≤ 1e-12 on a grid.
StableFunction make_stable(StableFamily family, cplx a, cplx b, double alpha = 2.0);

cplx eval_stable(const StableFunction& f, cplx z);
/// (φ(z), φ′(z)).
std::pair<cplx, cplx> eval_stable_derivative(const StableFunction& f, cplx z);

struct StabilityResult {
  double b = 1.0;
  double c = 0.0;
  /// max over the probe points of |φ(z) + φ(az)/a − φ(bz)/b − c| / (1 + |φ(z)|).
  double residual = 0.0;
};

/// Closed-form (b, c) for a catalogue member.
StabilityResult check_stability(const StableFunction& f, double a_test);
/// Least-squares (b, c) for an arbitrary function; a large residual means the
/// function is not stable.
StabilityResult check_stability(const std::function<cplx(cplx)>& phi, double a_test);

/// Pair with F_ν⁻¹(z) = z + ψ(z) and F_μ(z) = z − φ(F_ν(z)). Throws
/// PreconditionError when z + ψ(z) cannot be inverted on the upper half-plane.
CFreePair make_stable_pair(const StableFunction& phi, const StableFunction& psi,
                           const InfdivSettings& s = {});

/// (μ₂, ν₂) with dμ₂(t) = dμ(at + b) and dν₂(t) = dν(at + b); carried
/// transforms are mapped along.
CFreePair push_pair(const CFreePair& p, const AffineMap& map);

/// Affine map taking q onto p in the sense dp(t) ≈ dq(at + b), matched on the
/// mean and spread of the second components.
AffineMap fit_equivalence(const CFreePair& p, const CFreePair& q);

}  // namespace cfree
