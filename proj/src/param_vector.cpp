#include "gossiprec/param_vector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace gossiprec {

void ParamVector::add_segment(std::string name, std::size_t length) {
  if (has_segment(name)) throw std::invalid_argument("duplicate segment: " + name);
  segments_.push_back({std::move(name), values_.size(), length});
  values_.resize(values_.size() + length, 0.0);
}

namespace {
template <typename Segments>
auto find_segment(const Segments& segs, std::string_view name) {
  return std::find_if(segs.begin(), segs.end(),
                      [&](const Segment& s) { return s.name == name; });
}
}  // namespace

std::span<double> ParamVector::segment(std::string_view name) {
  auto it = find_segment(segments_, name);
  if (it == segments_.end()) throw std::out_of_range("no segment " + std::string(name));
  return std::span<double>(values_).subspan(it->offset, it->length);
}

std::span<const double> ParamVector::segment(std::string_view name) const {
  auto it = find_segment(segments_, name);
  if (it == segments_.end()) throw std::out_of_range("no segment " + std::string(name));
  return std::span<const double>(values_).subspan(it->offset, it->length);
}

bool ParamVector::has_segment(std::string_view name) const noexcept {
  return find_segment(segments_, name) != segments_.end();
}

bool ParamVector::layout_valid() const noexcept {
  std::size_t expected = 0;
  for (const auto& s : segments_) {
    if (s.offset != expected) return false;
    expected += s.length;
  }
  return expected == values_.size();
}

bool ParamVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

namespace {

constexpr char kMagic[4] = {'G', 'R', 'P', 'V'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out_.insert(out_.end(), buf, buf + sizeof(T));
  }

  void put_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, in_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ProtocolError("truncated model payload");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t serialized_size(const GossipModel& model) {
  std::size_t n = 4 + 4 + 4 + 8 + 8 + 4;
  for (const auto& s : model.params.segments()) n += 4 + s.name.size() + 8 + 8;
  return n + 8 + 8 * model.params.size();
}

std::vector<std::uint8_t> serialize(const GossipModel& model) {
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(model));
  Writer w(out);
  w.put_bytes(kMagic, 4);
  w.put(kVersion);
  w.put(model.owner);
  w.put(model.age.count);
  w.put(model.sample_count);
  w.put(static_cast<std::uint32_t>(model.params.segments().size()));
  for (const auto& s : model.params.segments()) {
    w.put(static_cast<std::uint32_t>(s.name.size()));
    w.put_bytes(s.name.data(), s.name.size());
    w.put(static_cast<std::uint64_t>(s.offset));
    w.put(static_cast<std::uint64_t>(s.length));
  }
  w.put(static_cast<std::uint64_t>(model.params.size()));
  for (double v : model.params.values()) w.put(v);
  return out;
}

GossipModel deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.get_string(4) != std::string(kMagic, 4)) throw ProtocolError("bad magic");
  if (r.get<std::uint32_t>() != kVersion) throw ProtocolError("unsupported payload version");
  GossipModel m;
  m.owner = r.get<std::uint32_t>();
  m.age.count = r.get<std::uint64_t>();
  m.sample_count = r.get<std::uint64_t>();
  const auto nseg = r.get<std::uint32_t>();
  std::vector<Segment> segs;
  for (std::uint32_t i = 0; i < nseg; ++i) {
    const auto len = r.get<std::uint32_t>();
    Segment s;
    s.name = r.get_string(len);
    s.offset = r.get<std::uint64_t>();
    s.length = r.get<std::uint64_t>();
    segs.push_back(std::move(s));
  }
  for (auto& s : segs) {
    if (m.params.has_segment(s.name)) throw ProtocolError("duplicate segment " + s.name);
    if (s.offset != m.params.size()) throw ProtocolError("segment table does not tile");
    m.params.add_segment(s.name, s.length);
  }
  const auto nval = r.get<std::uint64_t>();
  if (nval != m.params.size()) throw ProtocolError("value count does not match segments");
  for (double& v : m.params.values()) v = r.get<double>();
  if (!r.done()) throw ProtocolError("trailing bytes in model payload");
  return m;
}

void save_checkpoint(const GossipModel& model, const std::string& path) {
  const auto bytes = serialize(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

GossipModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace gossiprec
