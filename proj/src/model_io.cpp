#include "maxent/model_io.hpp"

#include "maxent/errors.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace maxent {

namespace {

constexpr std::string_view kMagic = "PBN1";
constexpr std::uint32_t kMaxLayers = 1u << 16;
constexpr std::uint32_t kMaxWidth = 1u << 24;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw InvalidInput("model file is truncated");
  }
  unsigned char byte(std::size_t i) const { return static_cast<unsigned char>(bytes_[i]); }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_model(const PbnNetwork& net) {
  std::string out(kMagic);
  put_u32(out, static_cast<std::uint32_t>(net.depth()));
  for (const auto& layer : net.layers()) {
    put_u32(out, static_cast<std::uint32_t>(layer.map.input_dim()));
    put_u32(out, static_cast<std::uint32_t>(layer.map.feature_dim()));
    put_u32(out, static_cast<std::uint32_t>(layer.map.kind()));
  }
  for (const auto& layer : net.layers()) {
    const Matrix& w = layer.map.w();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) put_f64(out, w(i, j));
    }
    for (Eigen::Index i = 0; i < layer.map.theta0().size(); ++i) put_f64(out, layer.map.theta0()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) put_f64(out, layer.bias[i]);
  }
  return out;
}

PbnNetwork decode_model(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < kMagic.size() || in.take(kMagic.size()) != kMagic) {
    throw InvalidInput("not a PBN1 model file (bad magic)");
  }
  const std::uint32_t depth = in.u32();
  if (depth == 0 || depth > kMaxLayers) throw InvalidInput("model file has an invalid layer count");

  struct Header {
    std::uint32_t n, m, kind;
  };
  std::vector<Header> headers(depth);
  for (auto& h : headers) {
    h.n = in.u32();
    h.m = in.u32();
    h.kind = in.u32();
    if (h.n == 0 || h.m == 0 || h.n > kMaxWidth || h.m > kMaxWidth || h.kind > 3) {
      throw InvalidInput("model file has an invalid layer header");
    }
  }

  std::vector<PbnLayer> layers;
  for (const auto& h : headers) {
    Matrix w(h.n, h.m);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = in.f64();
    }
    Vector theta0(h.n);
    for (Eigen::Index i = 0; i < theta0.size(); ++i) theta0[i] = in.f64();
    Vector bias(h.m);
    for (Eigen::Index i = 0; i < bias.size(); ++i) bias[i] = in.f64();
    layers.push_back({LayerMap(std::move(w), static_cast<ActivationKind>(h.kind), std::move(theta0)),
                      std::move(bias)});
  }
  if (!in.done()) throw InvalidInput("model file has trailing bytes");
  return PbnNetwork(std::move(layers));
}

void save_model(const PbnNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  const std::string bytes = encode_model(net);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidInput("failed writing " + path.string());
}

PbnNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_model(buf.str());
}

}  // namespace maxent
