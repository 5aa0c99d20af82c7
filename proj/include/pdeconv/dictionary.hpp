#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pdeconv/image.hpp"
#include "pdeconv/operators.hpp"

namespace pdeconv {

/// A frame dictionary Phi: synthesis maps L coefficients to an n-pixel image,
/// analysis is its adjoint Phi^T. Bounds satisfy
///   c1 ||x||^2 <= ||Phi^T x||^2 <= c2 ||x||^2,
/// and a tight dictionary has Phi Phi^T = c I with c = c1 = c2.
class FrameDictionary {
public:
    FrameDictionary(std::size_t image_dim, std::size_t coeff_dim, LinearOperator::Map synthesis,
                    LinearOperator::Map analysis, FrameBounds bounds, bool tight,
                    std::string name);

    std::size_t image_dim() const noexcept { return synthesis_op_.out_dim(); }
    std::size_t coeff_dim() const noexcept { return synthesis_op_.in_dim(); }
    FrameBounds bounds() const noexcept { return bounds_; }
    bool tight() const noexcept { return tight_; }
    /// Tight with L == n, i.e. Phi^T Phi = c I as well.
    bool orthobasis() const noexcept { return tight_ && coeff_dim() == image_dim(); }
    const std::string& name() const noexcept { return synthesis_op_.name(); }

    Vector synthesis(std::span<const double> coeffs) const { return synthesis_op_.apply(coeffs); }
    Vector analysis(std::span<const double> image) const { return synthesis_op_.adjoint(image); }

    /// Phi as a linear operator R^L -> R^n (spectral bound sqrt(c2)).
    const LinearOperator& synthesis_operator() const noexcept { return synthesis_op_; }
    /// Phi^T as a linear operator R^n -> R^L.
    LinearOperator analysis_operator() const { return synthesis_op_.transposed(); }

private:
    LinearOperator synthesis_op_;
    FrameBounds bounds_;
    bool tight_;
};

FrameDictionary make_dirac(std::size_t n);

/// Orthonormal separable Haar pyramid. A dimension equal to 1 is left untouched,
/// so width x 1 rasters give the 1-D transform.
FrameDictionary make_haar_dwt(int width, int height, int levels);

/// Undecimated isotropic starlet (B3-spline a trous) with `levels` detail bands
/// plus the coarse band, L = (levels + 1) n, renormalized to a Parseval frame.
/// Coefficient layout: [w_1, ..., w_levels, c_levels], each band n samples.
FrameDictionary make_starlet(int width, int height, int levels);

/// Concatenation of dictionaries, each scaled by 1/sqrt(K). Tight members with
/// constants c_k give a tight union with c = mean(c_k).
FrameDictionary make_union(const std::vector<FrameDictionary>& dicts);

/// Empirical extreme eigenvalues of Phi Phi^T from `probes` power-iteration steps
/// (shifted power iteration for the smallest one).
FrameBounds frame_bounds(const FrameDictionary& dict, int probes = 100, std::uint64_t seed = 0);

/// Parses `dirac`, `haar:levels=J`, `starlet:levels=J`, `union(a,b,...)`.
FrameDictionary parse_dictionary(const std::string& spec, int width, int height);

} // namespace pdeconv
