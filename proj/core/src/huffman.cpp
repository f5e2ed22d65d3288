#include "huffman.hpp"

#include <algorithm>
#include <queue>
#include <utility>

#include "bytes.hpp"
#include "qpkt/codec.hpp"

namespace qpkt::detail {
namespace {

constexpr int kMaxCodeLen = 57;  // keeps the 64-bit bit buffer safe

struct CodeEntry {
    uint16_t symbol;
    uint8_t length;
};

struct CanonicalCode {
    std::vector<CodeEntry> entries;  // sorted by (length, symbol)
    std::vector<uint64_t> codes;     // MSB-first word per entry
    // per-length decode table
    uint64_t first_code[kMaxCodeLen + 1] = {};
    uint32_t first_index[kMaxCodeLen + 1] = {};
    uint32_t count[kMaxCodeLen + 1] = {};
};

CanonicalCode canonicalize(std::vector<CodeEntry> entries) {
    std::sort(entries.begin(), entries.end(), [](auto a, auto b) {
        return a.length != b.length ? a.length < b.length : a.symbol < b.symbol;
    });
    CanonicalCode cc;
    cc.codes.resize(entries.size());
    uint64_t code = 0;
    uint8_t prev_len = 0;
    for (size_t i = 0; i < entries.size(); ++i) {
        uint8_t len = entries[i].length;
        if (len == 0 || len > kMaxCodeLen)
            throw CodecError("malformed prefix table");
        if (i > 0) code = (code + 1) << (len - prev_len);
        if (code >> len) throw CodecError("malformed prefix table");
        cc.codes[i] = code;
        if (cc.count[len]++ == 0) {
            cc.first_code[len] = code;
            cc.first_index[len] = static_cast<uint32_t>(i);
        }
        prev_len = len;
    }
    cc.entries = std::move(entries);
    return cc;
}

// Huffman code lengths with deterministic tie-breaking: equal-frequency
// nodes are taken smaller-symbol first, and leaves before merged nodes.
std::vector<CodeEntry> build_lengths(std::span<const uint16_t> symbols) {
    std::vector<uint64_t> freq(65536, 0);
    for (uint16_t s : symbols) ++freq[s];
    std::vector<uint16_t> distinct;
    for (uint32_t s = 0; s < 65536; ++s)
        if (freq[s]) distinct.push_back(static_cast<uint16_t>(s));
    if (distinct.empty()) return {};
    if (distinct.size() == 1) return {{distinct[0], 1}};

    struct Node {
        uint64_t freq;
        uint32_t tie;  // symbol for leaves, 65536+creation order for merges
        int left = -1, right = -1;
    };
    std::vector<Node> nodes;
    auto cmp = [&](int a, int b) {
        if (nodes[a].freq != nodes[b].freq) return nodes[a].freq > nodes[b].freq;
        return nodes[a].tie > nodes[b].tie;
    };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> heap(cmp);
    for (uint16_t s : distinct) {
        nodes.push_back({freq[s], s});
        heap.push(static_cast<int>(nodes.size()) - 1);
    }
    uint32_t next_tie = 65536;
    while (heap.size() > 1) {
        int a = heap.top();
        heap.pop();
        int b = heap.top();
        heap.pop();
        nodes.push_back({nodes[a].freq + nodes[b].freq, next_tie++, a, b});
        heap.push(static_cast<int>(nodes.size()) - 1);
    }
    int root = heap.top();

    std::vector<CodeEntry> out;
    std::vector<std::pair<int, uint8_t>> stack{{root, 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        const Node& nd = nodes[id];
        if (nd.left < 0) {
            if (depth > kMaxCodeLen) throw CodecError("prefix code too deep");
            out.push_back({static_cast<uint16_t>(nd.tie), depth});
        } else {
            stack.push_back({nd.left, static_cast<uint8_t>(depth + 1)});
            stack.push_back({nd.right, static_cast<uint8_t>(depth + 1)});
        }
    }
    return out;
}

}  // namespace

std::vector<std::byte> huffman_pack(std::span<const uint16_t> symbols) {
    CanonicalCode cc = canonicalize(build_lengths(symbols));
    ByteWriter w;
    w.u64(symbols.size());
    w.u32(static_cast<uint32_t>(cc.entries.size()));
    for (const CodeEntry& e : cc.entries) {
        w.u16(e.symbol);
        w.u8(e.length);
    }
    std::vector<uint64_t> code_of(65536);
    std::vector<uint8_t> len_of(65536);
    for (size_t i = 0; i < cc.entries.size(); ++i) {
        code_of[cc.entries[i].symbol] = cc.codes[i];
        len_of[cc.entries[i].symbol] = cc.entries[i].length;
    }
    uint64_t bitbuf = 0;
    int nbits = 0;
    std::vector<std::byte> bits;
    bits.reserve(symbols.size());
    for (uint16_t s : symbols) {
        bitbuf = (bitbuf << len_of[s]) | code_of[s];
        nbits += len_of[s];
        while (nbits >= 8) {
            bits.push_back(static_cast<std::byte>((bitbuf >> (nbits - 8)) & 0xFF));
            nbits -= 8;
        }
    }
    if (nbits > 0)
        bits.push_back(static_cast<std::byte>((bitbuf << (8 - nbits)) & 0xFF));
    w.raw(bits);
    return w.take();
}

std::vector<uint16_t> huffman_unpack(std::span<const std::byte> blob) {
    ByteReader r(blob);
    uint64_t n = r.u64();
    uint32_t n_distinct = r.u32();
    if (n_distinct > 65536) throw CodecError("malformed prefix table");
    if (n == 0) return {};
    if (n_distinct == 0) throw CodecError("malformed prefix table");
    std::vector<CodeEntry> entries(n_distinct);
    for (CodeEntry& e : entries) {
        e.symbol = r.u16();
        e.length = r.u8();
    }
    CanonicalCode cc = canonicalize(std::move(entries));
    auto bits = r.raw(r.remaining());
    std::vector<uint16_t> out;
    out.reserve(n);
    size_t bitpos = 0;
    const size_t bit_end = bits.size() * 8;
    for (uint64_t i = 0; i < n; ++i) {
        uint64_t code = 0;
        int len = 0;
        for (;;) {
            if (bitpos >= bit_end) throw CodecError("prefix stream truncated");
            int bit = (static_cast<uint8_t>(bits[bitpos >> 3]) >> (7 - (bitpos & 7))) & 1;
            ++bitpos;
            code = (code << 1) | static_cast<uint64_t>(bit);
            if (++len > kMaxCodeLen) throw CodecError("prefix stream corrupt");
            if (cc.count[len] && code >= cc.first_code[len] &&
                code - cc.first_code[len] < cc.count[len]) {
                out.push_back(
                    cc.entries[cc.first_index[len] + (code - cc.first_code[len])].symbol);
                break;
            }
        }
    }
    return out;
}

}  // namespace qpkt::detail
