// Copyright 2026 The EFDN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "efdn/weights_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "efdn/error.hpp"
#include "efdn/filters.hpp"

namespace efdn {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    }
    return v;
}

class Writer {
public:
    void u32(std::uint32_t v) {
        v = to_le(v);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        out_.insert(out_.end(), p, p + 4);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
    void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    std::uint32_t u32() {
        need(4, "integer");
        std::uint32_t v;
        std::memcpy(&v, bytes_.data() + pos_, 4);
        pos_ += 4;
        return to_le(v);
    }
    std::string str(const char* what) {
        const std::uint32_t n = u32();
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(std::string("truncated weights file while reading ") + what);
        }
    }
    [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::string> filter_constants(const std::vector<BranchKind>& kinds) {
    std::vector<std::string> ids;
    for (BranchKind k : kinds) {
        if (auto f = branch_filter(k)) {
            ids.emplace_back(filter_constant_id(*f));
        }
    }
    return ids;
}

} // namespace

std::vector<std::uint8_t> encode_weights(const Model& m) {
    const ModelSpec& spec = m.spec();
    Writer w;
    w.raw(kWeightsMagic, sizeof kWeightsMagic);
    w.u32(kWeightsVersion);
    w.u32(spec.mode == Mode::train ? 0u : 1u);
    w.str(std::string(arch_name(spec.arch)));
    w.u32(static_cast<std::uint32_t>(spec.scale));
    w.u32(static_cast<std::uint32_t>(spec.width));
    w.u32(static_cast<std::uint32_t>(spec.depth));
    w.u32(static_cast<std::uint32_t>(spec.branch_kinds.size()));
    for (BranchKind k : spec.branch_kinds) {
        w.str(std::string(branch_name(k)));
    }
    const auto ids = filter_constants(spec.branch_kinds);
    w.u32(static_cast<std::uint32_t>(ids.size()));
    for (const auto& id : ids) {
        w.str(id);
    }
    const auto views = parameter_views(m);
    w.u32(static_cast<std::uint32_t>(views.size()));
    for (const ParamView& v : views) {
        w.str(v.name);
        w.u32(static_cast<std::uint32_t>(v.dims.size()));
        for (int d : v.dims) {
            w.u32(static_cast<std::uint32_t>(d));
        }
        for (float f : v.values) {
            w.f32(f);
        }
    }
    return w.take();
}

Model decode_weights(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    r.need(4, "magic");
    if (std::memcmp(bytes.data(), kWeightsMagic, 4) != 0) {
        throw FormatError("not an EFDW weights file (bad magic)");
    }
    (void)r.u32();
    const std::uint32_t version = r.u32();
    if (version != kWeightsVersion) {
        throw FormatError("unsupported weights version " + std::to_string(version));
    }
    const std::uint32_t mode = r.u32();
    if (mode > 1) {
        throw FormatError("unknown mode tag " + std::to_string(mode));
    }
    ModelSpec spec;
    spec.mode = mode == 0 ? Mode::train : Mode::deploy;
    const std::string arch = r.str("arch");
    const auto parsed_arch = parse_arch(arch);
    if (!parsed_arch) {
        throw FormatError("unknown architecture '" + arch + "'");
    }
    spec.arch = *parsed_arch;
    spec.scale = static_cast<int>(r.u32());
    spec.width = static_cast<int>(r.u32());
    spec.depth = static_cast<int>(r.u32());
    const std::uint32_t nkinds = r.u32();
    r.need(nkinds, "branch kinds");
    for (std::uint32_t i = 0; i < nkinds; ++i) {
        const std::string name = r.str("branch kind");
        const auto k = parse_branch_name(name);
        if (!k) {
            throw FormatError("unknown branch kind '" + name + "'");
        }
        spec.branch_kinds.push_back(*k);
    }
    const std::uint32_t nids = r.u32();
    r.need(nids, "filter constants");
    std::vector<std::string> ids;
    for (std::uint32_t i = 0; i < nids; ++i) {
        const std::string id = r.str("filter constant");
        if (!parse_filter_constant_id(id)) {
            throw FormatError("unknown filter constant '" + id + "'");
        }
        ids.push_back(id);
    }
    if (ids != filter_constants(spec.branch_kinds)) {
        throw FormatError("filter constants do not match the branch kinds");
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        throw FormatError(std::string("invalid model spec: ") + e.what());
    }

    Model m = zero_model(spec);
    auto slots = parameter_slots(m);
    std::map<std::string, std::size_t, std::less<>> by_name;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        by_name.emplace(slots[i].name, i);
    }
    std::set<std::string, std::less<>> seen;
    const std::uint32_t count = r.u32();
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::string name = r.str("tensor name");
        if (!seen.insert(name).second) {
            throw FormatError("duplicate tensor '" + name + "'");
        }
        const auto it = by_name.find(name);
        if (it == by_name.end()) {
            throw FormatError("unexpected tensor '" + name + "'");
        }
        ParamSlot& slot = slots[it->second];
        const std::uint32_t rank = r.u32();
        r.need(static_cast<std::size_t>(rank) * 4, "dims");
        std::vector<int> dims(rank);
        std::uint64_t product = 1;
        for (auto& d : dims) {
            const std::uint32_t v = r.u32();
            d = static_cast<int>(v);
            product *= v;
        }
        if (dims != slot.dims || product != slot.values.size()) {
            throw FormatError("tensor '" + name + "' has dims that do not match the layout");
        }
        r.need(product * 4, "tensor data");
        for (float& f : slot.values) {
            f = r.f32();
        }
    }
    if (seen.size() != slots.size()) {
        for (const auto& s : slots) {
            if (!seen.contains(s.name)) {
                throw FormatError("missing tensor '" + s.name + "'");
            }
        }
    }
    if (r.remaining() != 0) {
        throw FormatError("trailing bytes after tensor table");
    }
    return m;
}

void save_weights(const Model& m, const std::filesystem::path& path) {
    const auto bytes = encode_weights(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path.string() + ": cannot open for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError(path.string() + ": write failed");
    }
}

Model load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path.string() + ": cannot open");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_weights(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace efdn
