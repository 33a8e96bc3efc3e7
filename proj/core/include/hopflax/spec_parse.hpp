#ifndef HOPFLAX_SPEC_PARSE_HPP
#define HOPFLAX_SPEC_PARSE_HPP

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hopflax/field.hpp"
#include "hopflax/kernel.hpp"

namespace hopflax {

/// "a=1,b=2" -> {a: "1", b: "2"}. Empty input gives an empty map.
std::map<std::string, std::string> parse_params(std::string_view text);

/// Kernel specs:
///   quadratic[:c=C]          C|a|^2/2
///   power:q=Q[,c=C]          C|a|^Q
///   exp-radial
///   aniso:s=S,s2=S2[,s3=..][,c=..,c2=..]
///   aniso-h:s=S,s2=S2        C(S)|x|^{S/(S-1)} + C(S2)|y|^{S2/(S2-1)}
///   conj:[pmax=P:]<spec>     numeric conjugate of another spec
///   tab:<path>               two-column "a L(a)" text, 1D only
/// n is the ambient dimension (0 when unknown); it is needed by conj: for
/// non-radial inner kernels.
Kernel parse_kernel(std::string_view spec, std::size_t n = 0);

/// Field specs: bump[:r=R], const:c=C, file:<path>, grid-bump[:n=..,kmax=..],
/// exponential[:n=..,p=..,alpha=..,kmin=..,kmax=..],
/// anisotropic[:s=..,s2=..,p=..,alpha=..].
Field parse_field(std::string_view spec, std::size_t n);

/// exp(1 - 1/(1 - |x|^2/r^2)) on B(0, r), 0 outside.
Field smooth_bump(std::size_t n, double radius = 1.0);
Field constant_field(std::size_t n, double c);

/// "key = value" lines; '#' starts a comment. Later keys win.
std::map<std::string, std::string> read_config(const std::string& path);

/// Whitespace- or comma-separated pairs, one per line; '#' comments.
std::pair<std::vector<double>, std::vector<double>> read_two_column(const std::string& path);

double param_double(const std::map<std::string, std::string>& params, const std::string& key, double fallback);
long param_int(const std::map<std::string, std::string>& params, const std::string& key, long fallback);

}  // namespace hopflax

#endif  // HOPFLAX_SPEC_PARSE_HPP
