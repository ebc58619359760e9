#pragma once

#include "custseg/matrix.hpp"
#include "custseg/seq2seq.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace custseg::detail {

struct LstmView {
    const double* W;
    const double* U;
    const double* b;
    std::size_t input;
    std::size_t hidden;
};

struct LstmGrad {
    double* W;
    double* U;
    double* b;
};

struct DenseView {
    const double* W;
    const double* b;
    std::size_t input;
    std::size_t output;
};

struct DenseGrad {
    double* W;
    double* b;
};

LstmView view(std::span<const double> params, const ParamLayout& layout, const ParamLayout::Lstm& l);
LstmGrad grad_view(std::span<double> grad, const ParamLayout& layout, const ParamLayout::Lstm& l);
DenseView view(std::span<const double> params, const ParamLayout& layout, const ParamLayout::Dense& d);
DenseGrad grad_view(std::span<double> grad, const ParamLayout& layout, const ParamLayout::Dense& d);

/// y = W x + b
void dense_forward(const DenseView& d, const double* x, double* y);
/// dW += dy x^T, db += dy, dx += W^T dy (dx may be null)
void dense_backward(const DenseView& d, const DenseGrad& g, const double* x, const double* dy, double* dx);

/// One cell step. `gates` receives the activated (i, f, g, o) blocks.
void lstm_step(const LstmView& v, const double* x, const double* h_prev, const double* c_prev, double* gates,
               double* c, double* h);

/// Activations of one LSTM layer over `steps` inputs. Row 0 of h and c is the
/// initial state; row t + 1 is the state after input t.
struct LstmTrace {
    Matrix h;
    Matrix c;
    Matrix gates;  // steps x 4H
};

void lstm_forward(const LstmView& v, const Matrix& inputs, std::span<const double> h0, LstmTrace& trace);

/// Backpropagation through time. `dh` has the upstream gradient for every
/// trace row (row 0 is the initial hidden state). Accumulates parameter
/// gradients into `g`; writes input gradients to `dinputs` when non-null and
/// the initial-hidden gradient to `dh0`.
void lstm_backward(const LstmView& v, const LstmGrad& g, const Matrix& inputs, const LstmTrace& trace,
                   const Matrix& dh, Matrix* dinputs, std::vector<double>& dh0, GradientFault fault);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace custseg::detail
