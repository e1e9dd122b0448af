#include "tnet/descriptor.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace tnet {

namespace {

std::vector<std::string> split_words(const std::string& line) {
    std::vector<std::string> words;
    std::istringstream is(line);
    std::string w;
    while (is >> w) words.push_back(w);
    return words;
}

int parse_count(const std::string& word, const std::string& key, int line_no) {
    const std::string prefix = key + "=";
    if (word.rfind(prefix, 0) != 0)
        throw DescriptorError(line_no, "expected " + key + "=<count>, got '" + word + "'");
    const std::string num = word.substr(prefix.size());
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(num, &used);
    } catch (const std::exception&) {
        throw DescriptorError(line_no, "malformed value in '" + word + "'");
    }
    if (used != num.size() || value < 1)
        throw DescriptorError(line_no, "malformed value in '" + word + "'");
    return value;
}

int find_key(const std::vector<std::string>& words, const std::string& key, int line_no) {
    for (std::size_t i = 1; i < words.size(); ++i)
        if (words[i].rfind(key + "=", 0) == 0) return parse_count(words[i], key, line_no);
    throw DescriptorError(line_no, "missing " + key + "=<count>");
}

void expect_words(const std::vector<std::string>& words, std::size_t n, int line_no) {
    if (words.size() != n)
        throw DescriptorError(line_no, "'" + words[0] + "' takes " + std::to_string(n - 1) +
                                           " argument(s), got " +
                                           std::to_string(words.size() - 1));
}

}  // namespace

NetworkDef parse_descriptor(const std::string& text) {
    NetworkDef def;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    bool saw_layer = false;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.resize(hash);
        const std::vector<std::string> words = split_words(raw);
        if (words.empty()) continue;
        const std::string& head = words[0];

        if (head == "input") {
            if (saw_layer) throw DescriptorError(line_no, "input line must come first");
            expect_words(words, 4, line_no);
            def.in_ch = find_key(words, "c", line_no);
            def.in_h = find_key(words, "h", line_no);
            def.in_w = find_key(words, "w", line_no);
        } else if (head == "bnmode") {
            if (saw_layer) throw DescriptorError(line_no, "bnmode line must precede layers");
            expect_words(words, 2, line_no);
            if (words[1] == "width")
                def.bn_mode = BnMode::width_axis;
            else if (words[1] == "channel")
                def.bn_mode = BnMode::channel_axis;
            else
                throw DescriptorError(line_no, "bnmode must be width or channel, got '" +
                                                   words[1] + "'");
        } else if (head == "conv") {
            if (words.size() < 3 || words.size() > 4)
                throw DescriptorError(line_no, "expected: conv <K>x<K> f=<n> [pad=same|valid]");
            ConvLayer c;
            const std::string& k = words[1];
            if (k.size() != 3 || k[1] != 'x' || k[0] != k[2] ||
                (k[0] != '1' && k[0] != '3' && k[0] != '5'))
                throw DescriptorError(line_no, "unsupported kernel size '" + k +
                                                   "' (1x1, 3x3 or 5x5)");
            c.kh = c.kw = k[0] - '0';
            c.filters = find_key(words, "f", line_no);
            c.pad = Pad::same;
            if (words.size() == 4) {
                if (words[3] == "pad=same")
                    c.pad = Pad::same;
                else if (words[3] == "pad=valid")
                    c.pad = Pad::valid;
                else
                    throw DescriptorError(line_no, "expected pad=same or pad=valid, got '" +
                                                       words[3] + "'");
            }
            def.layers.push_back(c);
            saw_layer = true;
        } else if (head == "tiny") {
            expect_words(words, 2, line_no);
            def.layers.push_back(TinyLayer{find_key(words, "f", line_no)});
            saw_layer = true;
        } else if (head == "fire" || head == "smallfire") {
            expect_words(words, 4, line_no);
            const int s = find_key(words, "s", line_no);
            const int e1 = find_key(words, "e1", line_no);
            const int e3 = find_key(words, "e3", line_no);
            if (head == "fire")
                def.layers.push_back(FireLayer{s, e1, e3});
            else
                def.layers.push_back(SmallFireLayer{s, e1, e3});
            saw_layer = true;
        } else if (head == "maxpool") {
            expect_words(words, 2, line_no);
            if (words[1] != "2x2")
                throw DescriptorError(line_no, "only 2x2 pooling is supported, got '" +
                                                   words[1] + "'");
            def.layers.push_back(MaxPoolLayer{});
            saw_layer = true;
        } else if (head == "gap") {
            expect_words(words, 1, line_no);
            def.layers.push_back(GapLayer{});
            saw_layer = true;
        } else if (head == "flatten") {
            expect_words(words, 1, line_no);
            def.layers.push_back(FlattenLayer{});
            saw_layer = true;
        } else if (head == "dense") {
            expect_words(words, 2, line_no);
            def.layers.push_back(DenseLayer{find_key(words, "f", line_no)});
            saw_layer = true;
        } else if (head == "softmax") {
            expect_words(words, 1, line_no);
            def.layers.push_back(SoftmaxLayer{});
            saw_layer = true;
        } else {
            throw DescriptorError(line_no, "unknown layer '" + head + "'");
        }
    }
    return def;
}

std::string write_descriptor(const NetworkDef& def) {
    std::ostringstream os;
    os << "input c=" << def.in_ch << " h=" << def.in_h << " w=" << def.in_w << "\n";
    os << "bnmode " << (def.bn_mode == BnMode::width_axis ? "width" : "channel") << "\n";
    for (const Layer& layer : def.layers) {
        if (const auto* c = std::get_if<ConvLayer>(&layer)) {
            os << "conv " << c->kh << "x" << c->kw << " f=" << c->filters << " pad="
               << (c->pad == Pad::same ? "same" : "valid") << "\n";
        } else if (const auto* t = std::get_if<TinyLayer>(&layer)) {
            os << "tiny f=" << t->filters << "\n";
        } else if (const auto* f = std::get_if<FireLayer>(&layer)) {
            os << "fire s=" << f->squeeze << " e1=" << f->expand1 << " e3=" << f->expand3
               << "\n";
        } else if (const auto* sf = std::get_if<SmallFireLayer>(&layer)) {
            os << "smallfire s=" << sf->squeeze << " e1=" << sf->expand1
               << " e3=" << sf->expand3 << "\n";
        } else if (std::holds_alternative<MaxPoolLayer>(layer)) {
            os << "maxpool 2x2\n";
        } else if (std::holds_alternative<GapLayer>(layer)) {
            os << "gap\n";
        } else if (std::holds_alternative<FlattenLayer>(layer)) {
            os << "flatten\n";
        } else if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            os << "dense f=" << d->units << "\n";
        } else if (std::holds_alternative<SoftmaxLayer>(layer)) {
            os << "softmax\n";
        }
    }
    return os.str();
}

bool layers_equal(const NetworkDef& a, const NetworkDef& b) {
    return a.in_ch == b.in_ch && a.in_h == b.in_h && a.in_w == b.in_w &&
           a.bn_mode == b.bn_mode && write_descriptor(a) == write_descriptor(b);
}

}  // namespace tnet
