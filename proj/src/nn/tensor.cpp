#include "nn/tensor.hpp"

namespace nmp::nn {

std::string shapeString(const Shape& dims)
{
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i)
            s += ", ";
        s += std::to_string(dims[i]);
    }
    return s + "]";
}

} // namespace nmp::nn
