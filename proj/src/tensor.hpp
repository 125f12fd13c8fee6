#pragma once

#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace nlm {

// Dense row-major tensor, double precision.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;

    static Tensor zeros(std::vector<std::size_t> s) {
        Tensor t;
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        t.shape = std::move(s);
        t.v.assign(n, 0.0);
        return t;
    }

    std::size_t size() const { return v.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return v[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols() + c]; }
};

// Parameters and gradients are addressed by name; std::map keeps iteration
// order deterministic.
using ParamMap = std::map<std::string, Tensor>;

}  // namespace nlm
