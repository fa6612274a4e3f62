#include "egoflow/fields.hpp"

#include <cmath>

#include "egoflow/error.hpp"

namespace egoflow {

void FlowField::check_shape() const {
    if (!u.same_shape(v) || !u.same_shape(valid))
        throw_invalid("flow field components have mismatched dimensions");
}

void DisparityField::check_shape() const {
    if (!d.same_shape(valid))
        throw_invalid("disparity field components have mismatched dimensions");
}

void check_intensity(const ScalarImage& img) {
    for (double p : img.pixels())
        if (!(p >= 0.0 && p <= 1.0)) throw_invalid("image intensity outside [0, 1]");
}

WarpField WarpField::from_flow(const FlowField& flow) {
    flow.check_shape();
    WarpField w(flow.width(), flow.height());
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        if (!flow.valid[i]) continue;
        w.du[i] = flow.u[i];
        w.dv[i] = flow.v[i];
    }
    return w;
}

WarpField WarpField::from_disparity(const DisparityField& disp, double sign) {
    disp.check_shape();
    WarpField w(disp.width(), disp.height());
    for (std::size_t i = 0; i < disp.d.size(); ++i)
        if (disp.valid[i]) w.du[i] = sign * disp.d[i];
    return w;
}

}  // namespace egoflow
