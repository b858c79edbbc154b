#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace nmp::nn {

using Shape = std::vector<std::size_t>;

std::string shapeString(const Shape& dims);

inline std::size_t shapeSize(const Shape& dims)
{
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

// Dense row-major array. Activations are rank 4: (batch, channels, frames, bins).
template <class T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape dims, T fill = T(0))
        : mDims(std::move(dims))
        , mValues(shapeSize(mDims), fill)
    {
    }
    Tensor(Shape dims, std::vector<T> values)
        : mDims(std::move(dims))
        , mValues(std::move(values))
    {
    }

    const Shape& dims() const { return mDims; }
    std::size_t rank() const { return mDims.size(); }
    std::size_t dim(std::size_t i) const { return mDims[i]; }
    std::size_t size() const { return mValues.size(); }
    bool empty() const { return mValues.empty(); }

    T* data() { return mValues.data(); }
    const T* data() const { return mValues.data(); }
    std::span<T> values() { return mValues; }
    std::span<const T> values() const { return mValues; }
    std::vector<T>& storage() { return mValues; }

    T& operator[](std::size_t i) { return mValues[i]; }
    const T& operator[](std::size_t i) const { return mValues[i]; }

    // Rank-4 accessors.
    std::size_t batch() const { return mDims[0]; }
    std::size_t channels() const { return mDims[1]; }
    std::size_t frames() const { return mDims[2]; }
    std::size_t bins() const { return mDims[3]; }
    std::size_t offset(std::size_t n, std::size_t c, std::size_t t, std::size_t f) const
    {
        return ((n * mDims[1] + c) * mDims[2] + t) * mDims[3] + f;
    }
    T& at(std::size_t n, std::size_t c, std::size_t t, std::size_t f) { return mValues[offset(n, c, t, f)]; }
    const T& at(std::size_t n, std::size_t c, std::size_t t, std::size_t f) const { return mValues[offset(n, c, t, f)]; }

    // Pointer to row (n, c, t, *).
    T* row(std::size_t n, std::size_t c, std::size_t t) { return mValues.data() + offset(n, c, t, 0); }
    const T* row(std::size_t n, std::size_t c, std::size_t t) const { return mValues.data() + offset(n, c, t, 0); }

    void fill(T v) { std::fill(mValues.begin(), mValues.end(), v); }
    bool sameShape(const Tensor& other) const { return mDims == other.mDims; }

    template <class U>
    Tensor<U> cast() const
    {
        return Tensor<U>(mDims, std::vector<U>(mValues.begin(), mValues.end()));
    }

private:
    Shape mDims;
    std::vector<T> mValues;
};

} // namespace nmp::nn
