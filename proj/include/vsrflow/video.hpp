#pragma once

#include <string>

#include "json.hpp"
#include "vsrflow/common.hpp"
#include "vsrflow/io.hpp"
#include "vsrflow/tensor.hpp"

namespace vsrflow {

// Pixel-space video: [frames, 3, height, width], values in [0, 1].
template <class T>
struct VideoTensor {
    Tensor<T> data;  // rank 4

    VideoTensor() = default;
    explicit VideoTensor(Tensor<T> t) : data(std::move(t)) {
        check_shape(data.rank() == 4, "video: rank-4 tensor required");
    }
    static VideoTensor zeros(int64_t f, int64_t c, int64_t h, int64_t w) {
        return VideoTensor(Tensor<T>::zeros({f, c, h, w}));
    }

    int64_t frames() const { return data.dims[0]; }
    int64_t channels() const { return data.dims[1]; }
    int64_t height() const { return data.dims[2]; }
    int64_t width() const { return data.dims[3]; }
};

// Latent-space video: [frames, 3*p^2, height/p, width/p].
template <class T>
struct LatentVideo {
    Tensor<T> data;  // rank 4

    LatentVideo() = default;
    explicit LatentVideo(Tensor<T> t) : data(std::move(t)) {
        check_shape(data.rank() == 4, "latent: rank-4 tensor required");
    }
    static LatentVideo zeros(int64_t f, int64_t c, int64_t h, int64_t w) {
        return LatentVideo(Tensor<T>::zeros({f, c, h, w}));
    }

    int64_t frames() const { return data.dims[0]; }
    int64_t channels() const { return data.dims[1]; }
    int64_t height() const { return data.dims[2]; }
    int64_t width() const { return data.dims[3]; }
};

struct VideoMeta {
    double fps = 8.0;
    std::string colorspace = "rgb";
};

inline void save_video(const std::string& path, const VideoTensor<float>& v,
                       const VideoMeta& meta = {}) {
    save_tensor(path, v.data);
    nlohmann::json side;
    side["frames"] = v.frames();
    side["fps"] = meta.fps;
    side["colorspace"] = meta.colorspace;
    write_file(path + ".json", side.dump(2) + "\n");
}

inline VideoTensor<float> load_video(const std::string& path, VideoMeta* meta = nullptr) {
    VideoTensor<float> v(load_tensor(path));
    if (meta) {
        std::ifstream side(path + ".json");
        if (side) {
            nlohmann::json j = nlohmann::json::parse(side);
            meta->fps = j.value("fps", 8.0);
            meta->colorspace = j.value("colorspace", std::string("rgb"));
        }
    }
    return v;
}

}  // namespace vsrflow
