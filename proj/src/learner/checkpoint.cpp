#include "gridcurio/learner/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "gridcurio/errors.hpp"

namespace gridcurio {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_bytes(std::ofstream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(std::ifstream& in) : in_(in) {}

  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ParseError("checkpoint: truncated file", 0);
  }
  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::string bytes() {
    const std::uint32_t n = u32();
    if (n > (1u << 26)) throw ParseError("checkpoint: implausible string length", 0);
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

 private:
  std::ifstream& in_;
};

static_assert(sizeof(float) == 4);

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("checkpoint: cannot open " + path + " for writing");
  out.write("GCKP", 4);
  put_u32(out, ckpt.version);
  put_bytes(out, ckpt.config_echo);
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const NamedTensor& t : ckpt.tensors) {
    put_bytes(out, t.name);
    put_u32(out, t.rows);
    put_u32(out, t.cols);
    for (float f : t.data) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(out, bits);
    }
  }
  if (!out) throw UsageError("checkpoint: write failed for " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("checkpoint: cannot open " + path);
  Reader r(in);
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, "GCKP", 4) != 0) throw ParseError("checkpoint: bad magic", 0);
  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != Checkpoint::kVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(ckpt.version), 0);
  }
  ckpt.config_echo = r.bytes();
  const std::uint32_t count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedTensor t;
    t.name = r.bytes();
    t.rows = r.u32();
    t.cols = r.u32();
    const std::uint64_t n = static_cast<std::uint64_t>(t.rows) * t.cols;
    if (n > (1ull << 28)) throw ParseError("checkpoint: implausible tensor size", 0);
    t.data.resize(n);
    for (auto& f : t.data) {
      const std::uint32_t bits = r.u32();
      std::memcpy(&f, &bits, 4);
    }
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

Checkpoint snapshot(const nn::ParameterList<float>& params, const std::string& config_echo) {
  Checkpoint ckpt;
  ckpt.config_echo = config_echo;
  for (const auto* p : params) {
    NamedTensor t;
    t.name = p->name;
    t.rows = static_cast<std::uint32_t>(p->value.rows());
    t.cols = static_cast<std::uint32_t>(p->value.cols());
    t.data.assign(p->value.data(), p->value.data() + p->value.size());
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void restore(const Checkpoint& ckpt, const nn::ParameterList<float>& params) {
  for (auto* p : params) {
    const NamedTensor* found = nullptr;
    for (const auto& t : ckpt.tensors) {
      if (t.name == p->name) found = &t;
    }
    if (found == nullptr) throw UsageError("checkpoint: missing tensor " + p->name);
    if (found->rows != p->value.rows() || found->cols != p->value.cols()) {
      throw UsageError("checkpoint: shape mismatch for " + p->name);
    }
    std::copy(found->data.begin(), found->data.end(), p->value.data());
  }
}

}  // namespace gridcurio
