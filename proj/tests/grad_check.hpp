#ifndef SPANCOREF_TESTS_GRAD_CHECK_HPP
#define SPANCOREF_TESTS_GRAD_CHECK_HPP

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "doctest.h"
#include "spancoref/nn/params.hpp"

namespace coref::testutil {

// Central finite differences against the analytic gradient. A probe passes
// when the difference is small in relative terms OR absolutely tiny (true
// zero gradients, e.g. softmax-shift-invariant biases, read as ~1e-10
// finite-difference noise and must not fail a pure relative test).
struct GradCheck {
  double rel_tol = 1e-6;
  double abs_tol = 1e-7;
  int probes = 0;       // total comparisons made
  int meaningful = 0;   // probes with a non-negligible gradient

  void probe_param(nn::Parameter& p, size_t k,
                   const std::function<double()>& eval) {
    const double theta = p.value.data[k];
    const double h = 1e-5 * std::max(1.0, std::fabs(theta));
    p.value.data[k] = theta + h;
    const double up = eval();
    p.value.data[k] = theta - h;
    const double down = eval();
    p.value.data[k] = theta;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = p.grad.data[k];
    const double diff = std::fabs(analytic - numeric);
    const double scale = std::fabs(analytic) + std::fabs(numeric);
    ++probes;
    if (scale > 1e-6) ++meaningful;
    INFO("param ", p.name, " entry ", k, " analytic ", analytic, " numeric ",
         numeric);
    CHECK((diff <= abs_tol || diff / scale <= rel_tol));
  }
};

}  // namespace coref::testutil

#endif
