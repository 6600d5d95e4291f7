#include "rdbr/pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace rdbr {

SswptResult estimate_profiles(const Signal& sig, int k, const SswptOptions& opts) {
    if (k < 1) throw std::invalid_argument("estimate_profiles: k must be >= 1");
    SswptResult out;
    out.coeffs = forward_wp(sig, opts.wp);
    const double f_lo = out.coeffs.scales.front();
    const double f_hi = out.coeffs.scales.back();
    const int nfreq = opts.nfreq > 0 ? opts.nfreq : std::max(2, static_cast<int>(std::lround(f_hi - f_lo)) + 1);
    out.tf = synchrosqueeze(out.coeffs, opts.wp, nfreq, f_lo, f_hi);
    const double penalty = opts.ridge_penalty >= 0.0 ? opts.ridge_penalty : 0.05 * nfreq;
    out.ridges = extract_ridges(out.tf, opts.max_ridges, penalty);
    if (out.ridges.empty()) throw std::runtime_error("estimate_profiles: no ridges found (signal has no energy in range)");
    out.classes = classify_fundamentals(out.ridges, k, opts.harmonic_tol);
    ProfileOptions po = opts.profile;
    po.bin_width = out.tf.bin_width();
    for (const auto& f : out.classes.fundamentals)
        out.profiles.push_back(profile_from_fundamental(f, out.coeffs, opts.wp, sig.grid(), po));
    return out;
}

}  // namespace rdbr
