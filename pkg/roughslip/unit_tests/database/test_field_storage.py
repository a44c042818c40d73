import struct

import pytest
import numpy as np

from utils.field_storage import ALIGNMENT, read_field, read_header, safe_name, write_field
from utilities.errors import StorageError


class TestFieldFiles:
    """Length-prefixed JSON header, then aligned little-endian float64 data"""

    def test_header_and_values(self, tmp_path, rng):
        values = rng.normal(size=(4, 6))
        path = write_field(tmp_path / "omega.bin", "omega", values, 0.25, {"kind": "stretched", "nx": 4})
        header, stored = read_field(path)
        assert header["shape"] == [4, 6] and header["time"] == 0.25
        assert header["grid"] == {"kind": "stretched", "nx": 4}
        assert np.array_equal(stored, values)

    def test_data_is_aligned(self, tmp_path):
        path = write_field(tmp_path / "a.bin", "a", np.arange(3.0))
        raw = path.read_bytes()
        (length,) = struct.unpack("<Q", raw[:8])
        offset = len(raw) - 3 * 8
        assert offset % ALIGNMENT == 0 and offset >= 8 + length
        assert np.frombuffer(raw[offset:], dtype="<f8").tolist() == [0.0, 1.0, 2.0]

    def test_memory_mapped_read(self, tmp_path):
        path = write_field(tmp_path / "nested" / "u.bin", "u", np.ones((2, 3, 5)))
        _, values = read_field(path, mmap=True)
        assert values.shape == (2, 3, 5) and float(values.sum()) == 30.0
        assert read_header(path)["name"] == "u"

    def test_truncated_file(self, tmp_path):
        path = write_field(tmp_path / "t.bin", "t", np.arange(10.0))
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(StorageError, match="8 of 10"):
            read_field(path)
        (tmp_path / "empty.bin").write_bytes(b"\x01")
        with pytest.raises(StorageError, match="header length"):
            read_header(tmp_path / "empty.bin")

    def test_missing_file(self, tmp_path):
        with pytest.raises(StorageError):
            read_field(tmp_path / "absent.bin")

    def test_safe_name(self):
        assert safe_name("omega/../t=0.5") == "omega..t0.5"
        assert safe_name("///") == "field"
