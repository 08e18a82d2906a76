#include "ftdf/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ftdf/error.hpp"
#include "ftdf/text.hpp"

namespace ftdf {

namespace {

// Names may contain anything but are written as single tokens.
std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '%' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            static constexpr char hex[] = "0123456789ABCDEF";
            out += '%';
            out += hex[(static_cast<unsigned char>(c) >> 4) & 0xF];
            out += hex[static_cast<unsigned char>(c) & 0xF];
        } else {
            out += c;
        }
    }
    return out;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

class Writer {
public:
    template <class... Parts>
    void line(std::string_view key, const Parts&... parts) {
        out_ += key;
        ((out_ += ' ', append(parts)), ...);
        out_ += '\n';
    }
    std::string take() { return std::move(out_); }

private:
    void append(std::string_view s) { out_ += s; }
    void append(const std::string& s) { out_ += s; }
    void append(const char* s) { out_ += s; }
    void append(double v) { out_ += text::format_double(v); }
    void append(std::size_t v) { out_ += std::to_string(v); }
    void append(int v) { out_ += std::to_string(v); }
    void append(bool v) { out_ += v ? '1' : '0'; }

    std::string out_;
};

[[noreturn]] void corrupt(std::size_t line, const std::string& why) {
    throw Error(Errc::CorruptModel, "line " + std::to_string(line) + ": " + why, line);
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    /// Next line split on single spaces; the first token must equal `key`.
    std::vector<std::string_view> expect(std::string_view key, std::size_t min_tokens = 1) {
        if (pos_ >= bytes_.size()) corrupt(line_no_ + 1, "unexpected end of file, wanted '" + std::string(key) + "'");
        const auto end = bytes_.find('\n', pos_);
        if (end == std::string_view::npos) corrupt(line_no_ + 1, "unterminated line");
        const auto line = bytes_.substr(pos_, end - pos_);
        pos_ = end + 1;
        ++line_no_;
        auto tokens = text::split(line, ' ');
        if (tokens.empty() || tokens[0] != key) corrupt(line_no_, "expected '" + std::string(key) + "'");
        if (tokens.size() < min_tokens + 1) corrupt(line_no_, "too few fields for '" + std::string(key) + "'");
        tokens.erase(tokens.begin());
        return tokens;
    }

    std::string_view peek_key() const {
        const auto end = bytes_.find_first_of(" \n", pos_);
        return end == std::string_view::npos ? bytes_.substr(pos_) : bytes_.substr(pos_, end - pos_);
    }

    std::size_t line_no() const { return line_no_; }
    bool at_end() const { return pos_ >= bytes_.size(); }

    std::size_t size(std::string_view token) const {
        const auto v = text::parse_int(token);
        if (!v || *v < 0) corrupt(line_no_, "bad integer '" + std::string(token) + "'");
        return static_cast<std::size_t>(*v);
    }
    std::uint64_t u64(std::string_view token) const {
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size()) corrupt(line_no_, "bad integer");
        return value;
    }
    double real(std::string_view token) const {
        const auto v = text::parse_double(token);
        if (!v) corrupt(line_no_, "bad number '" + std::string(token) + "'");
        return *v;
    }
    bool flag(std::string_view token) const {
        if (token == "1") return true;
        if (token == "0") return false;
        corrupt(line_no_, "bad flag");
    }
    Descriptor descriptor(std::string_view token) const {
        const auto d = parse_descriptor(token);
        if (!d) corrupt(line_no_, "unknown descriptor '" + std::string(token) + "'");
        return *d;
    }
    std::string name(std::string_view token) const {
        std::string out;
        for (std::size_t i = 0; i < token.size(); ++i) {
            if (token[i] != '%') {
                out += token[i];
                continue;
            }
            if (i + 2 >= token.size()) corrupt(line_no_, "bad escape");
            const int hi = hex_digit(token[i + 1]), lo = hex_digit(token[i + 2]);
            if (hi < 0 || lo < 0) corrupt(line_no_, "bad escape");
            out += static_cast<char>(hi * 16 + lo);
            i += 2;
        }
        return out;
    }

    /// A token list prefixed by its own length.
    std::vector<std::string_view> counted(std::string_view key) {
        auto tokens = expect(key);
        const std::size_t n = size(tokens[0]);
        if (tokens.size() != n + 1) corrupt(line_no_, "'" + std::string(key) + "' count does not match");
        tokens.erase(tokens.begin());
        return tokens;
    }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

void write_tree(Writer& w, const DecisionTree& tree) {
    for (const auto& node : tree.nodes()) {
        if (node.is_leaf()) {
            std::string counts;
            for (std::size_t c = 0; c < node.counts.size(); ++c) {
                if (c) counts += ' ';
                counts += std::to_string(node.counts[c]);
            }
            w.line("leaf", counts);
        } else {
            w.line("split", static_cast<std::size_t>(node.feature), node.threshold);
        }
    }
}

DecisionTree read_tree(Reader& r, std::size_t node_count, std::size_t num_features, std::size_t num_classes) {
    std::vector<TreeNode> nodes;
    nodes.reserve(node_count);
    // Pre-order: a split's left subtree follows it directly, its right
    // subtree follows the left one.
    std::vector<std::uint32_t> open;  // splits still waiting for a right child
    std::vector<bool> left_done;
    while (nodes.size() < node_count) {
        const auto index = static_cast<std::uint32_t>(nodes.size());
        if (!open.empty()) {
            auto& parent = nodes[open.back()];
            if (!left_done.back()) {
                parent.left = index;
                left_done.back() = true;
            } else {
                parent.right = index;
                open.pop_back();
                left_done.pop_back();
            }
        } else if (index != 0) {
            corrupt(r.line_no(), "tree has nodes outside its root");
        }
        TreeNode node;
        if (r.peek_key() == "split") {
            const auto t = r.expect("split", 2);
            if (t.size() != 2) corrupt(r.line_no(), "split needs feature and threshold");
            const std::size_t f = r.size(t[0]);
            if (f >= num_features) corrupt(r.line_no(), "split feature out of range");
            node.feature = static_cast<int>(f);
            node.threshold = r.real(t[1]);
            nodes.push_back(std::move(node));
            open.push_back(index);
            left_done.push_back(false);
        } else {
            const auto t = r.expect("leaf", 1);
            if (t.size() != num_classes) corrupt(r.line_no(), "leaf count vector has wrong length");
            std::size_t total = 0;
            for (auto tok : t) {
                node.counts.push_back(static_cast<std::uint32_t>(r.size(tok)));
                total += node.counts.back();
            }
            if (total == 0) corrupt(r.line_no(), "empty leaf");
            nodes.push_back(std::move(node));
        }
    }
    if (!open.empty()) corrupt(r.line_no(), "tree ends with unfinished splits");
    return DecisionTree(std::move(nodes), num_features, num_classes);
}

}  // namespace

std::string serialize_model(const BaggedEnsemble& model) {
    Writer w;
    w.line(kModelMagic);
    w.line("format_version", kModelFormatVersion);
    std::string classes = std::to_string(model.classes.size());
    for (const auto& c : model.classes.names()) classes += ' ' + escape(c);
    w.line("classes", classes);
    std::string columns = std::to_string(model.columns.size());
    for (const auto& c : model.columns) columns += ' ' + escape(c);
    w.line("columns", columns);
    w.line("master_seed", std::to_string(model.seed));
    w.line("n_trees", model.trees.size());
    w.line("bootstrap", model.params.bootstrap);
    w.line("max_splits", model.params.tree.max_splits);
    w.line("min_leaf_size", model.params.tree.min_leaf_size);
    w.line("pipeline", model.pipeline.has_value());
    if (model.pipeline) {
        const auto& p = *model.pipeline;
        w.line("window_len", p.window_len);
        w.line("overlap", p.overlap);
        w.line("scheme", p.scheme.name());
        const auto& f = p.scheme.fusion;
        w.line("pair_a", descriptor_name(f.pair_a.first), descriptor_name(f.pair_a.second));
        w.line("pair_b", descriptor_name(f.pair_b.first), descriptor_name(f.pair_b.second));
        std::string lags = std::to_string(f.lags.size());
        for (auto l : f.lags) lags += ' ' + std::to_string(l);
        w.line("lags", lags);
        w.line("include_raw", f.include_raw);
        w.line("ar_order", p.params.ar.order);
        w.line("sscf_threshold", p.params.sscf_threshold);
        w.line("literal_rms", p.params.literal_rms);
        w.line("normalizer", p.normalizer.descriptors.size());
        for (std::size_t i = 0; i < p.normalizer.descriptors.size(); ++i)
            w.line("stat", descriptor_name(p.normalizer.descriptors[i]), p.normalizer.stats[i].mean,
                   p.normalizer.stats[i].stddev);
    }
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        w.line("tree", t, model.trees[t].nodes().size());
        write_tree(w, model.trees[t]);
    }
    w.line("end");
    return w.take();
}

BaggedEnsemble parse_model(std::string_view bytes) {
    if (bytes.size() < kModelMagic.size() || bytes.substr(0, kModelMagic.size()) != kModelMagic) {
        if (kModelMagic.substr(0, bytes.size()) == bytes && !bytes.empty())
            throw Error(Errc::CorruptModel, "file ends inside the magic string");
        throw Error(Errc::BadMagic, "not an FTDF01 model file");
    }
    Reader r(bytes);
    r.expect(kModelMagic, 0);
    {
        const auto t = r.expect("format_version");
        const auto v = text::parse_int(t[0]);
        if (!v) corrupt(r.line_no(), "bad format version");
        if (*v != kModelFormatVersion)
            throw Error(Errc::VersionUnsupported, "model format version " + std::to_string(*v) + " is not supported");
    }
    BaggedEnsemble model;
    std::vector<std::string> classes;
    for (auto tok : r.counted("classes")) classes.push_back(r.name(tok));
    model.classes = LabelDictionary(classes);
    if (model.classes.names() != classes) corrupt(r.line_no(), "class dictionary not sorted or not unique");
    for (auto tok : r.counted("columns")) model.columns.push_back(r.name(tok));
    model.seed = r.u64(r.expect("master_seed")[0]);
    const std::size_t n_trees = r.size(r.expect("n_trees")[0]);
    model.params.n_trees = n_trees;
    model.params.bootstrap = r.flag(r.expect("bootstrap")[0]);
    model.params.tree.max_splits = r.size(r.expect("max_splits")[0]);
    model.params.tree.min_leaf_size = r.size(r.expect("min_leaf_size")[0]);
    if (r.flag(r.expect("pipeline")[0])) {
        PipelineMeta p;
        p.window_len = r.size(r.expect("window_len")[0]);
        p.overlap = r.real(r.expect("overlap")[0]);
        const std::string scheme(r.expect("scheme")[0]);
        auto a = r.expect("pair_a", 2);
        auto b = r.expect("pair_b", 2);
        FusionConfig f;
        f.pair_a = {r.descriptor(a[0]), r.descriptor(a[1])};
        f.pair_b = {r.descriptor(b[0]), r.descriptor(b[1])};
        f.lags.clear();
        for (auto tok : r.counted("lags")) f.lags.push_back(r.size(tok));
        f.include_raw = r.flag(r.expect("include_raw")[0]);
        if (scheme == "fTDF") {
            p.scheme = FeatureScheme::fused(f);
        } else {
            p.scheme = FeatureScheme{r.descriptor(scheme), f};
        }
        p.params.ar.order = r.size(r.expect("ar_order")[0]);
        p.params.sscf_threshold = r.real(r.expect("sscf_threshold")[0]);
        p.params.literal_rms = r.flag(r.expect("literal_rms")[0]);
        const std::size_t n_stats = r.size(r.expect("normalizer")[0]);
        for (std::size_t i = 0; i < n_stats; ++i) {
            const auto t = r.expect("stat", 3);
            p.normalizer.descriptors.push_back(r.descriptor(t[0]));
            p.normalizer.stats.push_back({r.real(t[1]), r.real(t[2])});
        }
        try {
            p.scheme.validate();
        } catch (const Error& e) {
            corrupt(r.line_no(), e.what());
        }
        model.pipeline = std::move(p);
    }
    for (std::size_t t = 0; t < n_trees; ++t) {
        const auto h = r.expect("tree", 2);
        if (r.size(h[0]) != t) corrupt(r.line_no(), "trees out of order");
        const std::size_t node_count = r.size(h[1]);
        if (node_count == 0) corrupt(r.line_no(), "empty tree");
        model.trees.push_back(read_tree(r, node_count, model.columns.size(), model.classes.size()));
    }
    r.expect("end", 0);
    if (!r.at_end()) corrupt(r.line_no(), "trailing data after 'end'");
    if (model.trees.empty()) corrupt(r.line_no(), "model has no trees");
    return model;
}

void save_model(const BaggedEnsemble& model, const std::filesystem::path& path) {
    const std::string bytes = serialize_model(model);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(Errc::IoError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(Errc::IoError, "cannot move model into place: " + ec.message());
}

BaggedEnsemble load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open model " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace ftdf
