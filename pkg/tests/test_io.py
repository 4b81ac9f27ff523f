import numpy as np
import pytest
from hypothesis import given, strategies as st

from spadcal import (
    DetectorParams,
    ParseError,
    PulseTrainParams,
    SimConfig,
    TagStream,
    flat_dark_model,
    parse_tags,
    read_tags_bin,
    read_tags_csv,
    simulate_stream,
    sniff_format,
    write_tags,
    write_tags_bin,
    write_tags_csv,
)
from spadcal.tagio import CSV_HEADER, MAGIC

from conftest import stream_from_pairs

SAMPLE = [(0, 0), (1, 3250), (0, 5_000_000), (0, 12_000_000), (1, 12_003_000)]


@st.composite
def tag_streams(draw):
    n = draw(st.integers(min_value=0, max_value=60))
    gaps = draw(st.lists(st.integers(min_value=0, max_value=10**9),
                         min_size=n, max_size=n))
    channels = draw(st.lists(st.integers(min_value=0, max_value=1),
                             min_size=n, max_size=n))
    t, pairs = 0, []
    for gap, ch in zip(gaps, channels):
        t += gap
        pairs.append((ch, t))
    # keep trigger-before-click ordering at ties
    pairs.sort(key=lambda p: (p[1], p[0]))
    return stream_from_pairs(pairs)


class TestCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "tags.csv"
        s = stream_from_pairs(SAMPLE)
        write_tags_csv(s, path)
        back = read_tags_csv(path)
        assert np.array_equal(back.channel, s.channel)
        assert np.array_equal(back.t_ps, s.t_ps)

    def test_header_written(self, tmp_path):
        path = tmp_path / "tags.csv"
        write_tags_csv(stream_from_pairs(SAMPLE), path)
        assert path.read_text().splitlines()[0] == CSV_HEADER

    def test_empty_stream(self, tmp_path):
        path = tmp_path / "tags.csv"
        write_tags_csv(stream_from_pairs([]), path)
        assert len(read_tags_csv(path)) == 0

    def test_bad_header_reports_line_one(self, tmp_path):
        path = tmp_path / "tags.csv"
        path.write_text("time,chan\n0,0\n")
        with pytest.raises(ParseError, match="line 1"):
            read_tags_csv(path)

    def test_malformed_record_names_line(self, tmp_path):
        path = tmp_path / "tags.csv"
        path.write_text(f"{CSV_HEADER}\n0,0\n1,oops\n0,100\n")
        with pytest.raises(ParseError, match="line 3"):
            read_tags_csv(path)

    def test_missing_column_names_line(self, tmp_path):
        path = tmp_path / "tags.csv"
        path.write_text(f"{CSV_HEADER}\n0,0\n1\n")
        with pytest.raises(ParseError, match="line 3"):
            read_tags_csv(path)

    def test_decreasing_timestamps_rejected(self, tmp_path):
        path = tmp_path / "tags.csv"
        path.write_text(f"{CSV_HEADER}\n0,500\n0,100\n")
        with pytest.raises(ParseError, match="record 1"):
            read_tags_csv(path)

    def test_explicit_duration_honoured(self, tmp_path):
        path = tmp_path / "tags.csv"
        write_tags_csv(stream_from_pairs(SAMPLE), path)
        s = read_tags_csv(path, duration_ps=10**9)
        assert s.duration_ps == 10**9

    @given(tag_streams())
    def test_round_trip_random(self, tmp_path_factory, stream):
        path = tmp_path_factory.mktemp("csv") / "tags.csv"
        write_tags_csv(stream, path)
        back = read_tags_csv(path)
        assert np.array_equal(back.channel, stream.channel)
        assert np.array_equal(back.t_ps, stream.t_ps)


class TestBin:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "tags.bin"
        s = stream_from_pairs(SAMPLE)
        write_tags_bin(s, path)
        back = read_tags_bin(path)
        assert np.array_equal(back.channel, s.channel)
        assert np.array_equal(back.t_ps, s.t_ps)

    def test_record_layout(self, tmp_path):
        path = tmp_path / "tags.bin"
        write_tags_bin(stream_from_pairs([(1, 0x0102)]), path)
        raw = path.read_bytes()
        assert raw[:8] == MAGIC
        assert len(raw) == 8 + 9
        assert raw[8] == 1
        assert raw[9:] == (0x0102).to_bytes(8, "little")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "tags.bin"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 9)
        with pytest.raises(ParseError, match="magic"):
            read_tags_bin(path)

    def test_truncated_record_reports_offset(self, tmp_path):
        path = tmp_path / "tags.bin"
        write_tags_bin(stream_from_pairs(SAMPLE), path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ParseError, match="truncated"):
            read_tags_bin(path)

    def test_empty_stream(self, tmp_path):
        path = tmp_path / "tags.bin"
        write_tags_bin(stream_from_pairs([]), path)
        assert path.read_bytes() == MAGIC
        assert len(read_tags_bin(path)) == 0

    @given(tag_streams())
    def test_round_trip_random(self, tmp_path_factory, stream):
        path = tmp_path_factory.mktemp("bin") / "tags.bin"
        write_tags_bin(stream, path)
        back = read_tags_bin(path)
        assert np.array_equal(back.channel, stream.channel)
        assert np.array_equal(back.t_ps, stream.t_ps)


class TestDispatch:
    def test_parse_tags_and_write_tags(self, tmp_path):
        s = stream_from_pairs(SAMPLE)
        for fmt in ("csv", "bin"):
            path = tmp_path / f"tags.{fmt}"
            write_tags(s, path, fmt)
            back = parse_tags(path, fmt)
            assert np.array_equal(back.t_ps, s.t_ps)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ParseError):
            write_tags(stream_from_pairs(SAMPLE), tmp_path / "x", "hdf5")
        with pytest.raises(ParseError):
            parse_tags(tmp_path / "x", "hdf5")

    def test_sniff_format(self, tmp_path):
        s = stream_from_pairs(SAMPLE)
        csv_path, bin_path = tmp_path / "a.dat", tmp_path / "b.dat"
        write_tags_csv(s, csv_path)
        write_tags_bin(s, bin_path)
        assert sniff_format(csv_path) == "csv"
        assert sniff_format(bin_path) == "bin"


def test_simulated_stream_survives_both_formats(tmp_path):
    det = DetectorParams(holdoff_ps=10_000_000, dark_rate_hz=0.0)
    cfg = SimConfig(
        detector=det,
        pulses=PulseTrainParams(rep_rate_hz=50_000, n_ph=1.0),
        dark_model=flat_dark_model(300.0, 10_000_000),
        duration_s=2.0,
        seed=21,
        eta=0.1,
    )
    s = simulate_stream(cfg)
    for fmt in ("csv", "bin"):
        path = tmp_path / f"sim.{fmt}"
        write_tags(s, path, fmt)
        back = parse_tags(path, fmt, duration_ps=s.duration_ps)
        assert np.array_equal(back.channel, s.channel)
        assert np.array_equal(back.t_ps, s.t_ps)
        assert back.duration_ps == s.duration_ps
