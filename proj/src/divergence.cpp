#include "parrep/divergence.hpp"

namespace parrep {

namespace {
double term(double a, double b) {
    if (a <= 0.0) return 0.0;
    if (b <= 0.0) return kInf;
    return a * std::log(a / b);
}
}  // namespace

ExtReal bern_kl(double p, double q) {
    if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0) throw std::domain_error("bern_kl: argument outside [0,1]");
    double s = term(p, q) + term(1.0 - p, 1.0 - q);
    return s < 0.0 ? 0.0 : s;
}

}  // namespace parrep
