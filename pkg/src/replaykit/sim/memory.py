"""Sparse byte-addressed memory with zero default."""


class SparseMemory:
    def __init__(self):
        self._bytes: dict[int, int] = {}

    def write(self, addr: int, data: bytes) -> None:
        for i, b in enumerate(data):
            self._bytes[(addr + i) & ((1 << 64) - 1)] = b

    def write_word(self, addr: int, value: int, size: int = 4) -> None:
        self.write(addr, value.to_bytes(size, "little"))

    def read(self, addr: int, count: int) -> bytes:
        return bytes(self._bytes.get(addr + i, 0) for i in range(count))

    def __len__(self):
        return len(self._bytes)


def dump_memory(mem: SparseMemory, base: int, byte_count: int) -> bytes:
    if byte_count < 0:
        raise ValueError("byte_count must be >= 0")
    return mem.read(base, byte_count)
