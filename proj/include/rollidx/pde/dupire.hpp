#pragma once

#include "rollidx/pde/localvol_grid.hpp"

#include <vector>

namespace rollidx::pde {

// Forward PDE for the normalized call c(t, k) = E[(s_t - k)^+] of the
// mean-reverting spot factor ds = a(1-s)dt + s L(t,s) dW, s_0 = 1:
//
//   dc/dt = -a c - a(1-k) dc/dk + (1/2) k^2 L(t,k)^2 d2c/dk2
//
// on k in [0, k_max], c(0,k) = (1-k)^+, Dirichlet boundaries c(t,0) = 1
// (the factor has unit mean for every t) and c(t,k_max) = 0.  a = 0 gives
// the plain driftless case used for the index.
//
// Discretization: Crank-Nicolson with central differences and a tridiagonal
// solve per step; the first steps run as halved fully-implicit pairs and the
// payoff is cell-averaged, which keeps second-order accuracy despite the
// kink at k = 1 and damps oscillations it would otherwise seed.

struct PdeOptions {
    int rannacher_steps = 2;  // leading time steps run as 2 implicit half-steps
    double theta = 0.5;       // 0.5 = Crank-Nicolson, 1.0 = implicit Euler
};

struct PdeSolution {
    std::vector<double> times; // ascending, starts at 0
    std::vector<double> k;     // ascending, starts at 0
    std::vector<std::vector<double>> values; // [time][k]

    // Diagnostics over all steps and interior nodes.
    double min_value = 0.0;             // most negative node value seen
    double min_second_difference = 0.0; // most negative c_{p-1} - 2c_p + c_{p+1}

    // Value at an exact time node (within 1e-9), linear in k.
    double at(double t, double strike) const;
    std::size_t time_index(double t) const;
};

// Uniform space grid with `nodes` points on [0, k_max].
std::vector<double> make_space_grid(std::size_t nodes, double k_max);

// Daily time grid: {d/365 : d = 0..days}.
std::vector<double> make_daily_time_grid(int days);

PdeSolution solve_forward_call_pde(double a, const LocalVolGrid& lv,
                                   const std::vector<double>& times,
                                   const std::vector<double>& k,
                                   const PdeOptions& options = {});

} // namespace rollidx::pde
