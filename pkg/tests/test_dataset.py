"""Demand CSV ingestion."""
import pytest

from oio_bench.core.exceptions import DemandExhausted, IngestionError
from oio_bench.services.dataset import load_csv, load_prices
from oio_bench.services.demand import next_demand


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="demand.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write


def test_load_with_header(write_csv):
    dataset = load_csv(write_csv("a,b\n1,2\n3,4.5\n"))
    assert dataset.shape == (2, 2)
    assert dataset.matrix[1].tolist() == [3.0, 4.5]


def test_load_without_header(write_csv):
    assert load_csv(write_csv("1\n2\n3\n")).shape == (3, 1)


def test_dataset_does_not_cycle(write_csv):
    process = load_csv(write_csv("1\n2\n")).open()
    assert next_demand(process, 2).tolist() == [2.0]
    with pytest.raises(DemandExhausted):
        next_demand(process, 3)


def test_empty_file(write_csv):
    with pytest.raises(IngestionError, match="no periods"):
        load_csv(write_csv(""))


def test_header_only(write_csv):
    with pytest.raises(IngestionError, match="no periods"):
        load_csv(write_csv("a,b\n"))


def test_ragged_row_reports_file_row(write_csv):
    with pytest.raises(IngestionError, match="row 3") as excinfo:
        load_csv(write_csv("a,b\n1,2\n3\n"))
    assert excinfo.value.row == 3


def test_negative_value(write_csv):
    with pytest.raises(IngestionError, match="row 2: column 2"):
        load_csv(write_csv("1,2\n3,-4\n"))


def test_non_numeric_value(write_csv):
    with pytest.raises(IngestionError, match="non-numeric"):
        load_csv(write_csv("1,2\n3,x\n"))


def test_non_finite_value(write_csv):
    with pytest.raises(IngestionError, match="non-finite"):
        load_csv(write_csv("1,inf\n"))


def test_missing_file(tmp_path):
    with pytest.raises(IngestionError, match="not found"):
        load_csv(tmp_path / "absent.csv")


def test_prices_single_row(write_csv):
    prices = load_prices(write_csv("p1,p2,p3\n1.5,2,3\n", name="prices.csv"), n=3)
    assert prices.tolist() == [1.5, 2.0, 3.0]


def test_prices_product_count_mismatch(write_csv):
    with pytest.raises(IngestionError, match="expected 2"):
        load_prices(write_csv("1,2,3\n", name="prices.csv"), n=2)


def test_prices_multiple_rows(write_csv):
    with pytest.raises(IngestionError, match="exactly one"):
        load_prices(write_csv("1,2\n3,4\n", name="prices.csv"))


def test_whitespace_and_exponent_notation(write_csv):
    dataset = load_csv(write_csv("sku_a,sku_b\n 1e1 , 2.5\n0,  3\n"))
    assert dataset.matrix.tolist() == [[10.0, 2.5], [0.0, 3.0]]


def test_first_bad_cell_reported(write_csv):
    with pytest.raises(IngestionError, match="row 3: column 1: non-numeric value 'n/a'"):
        load_csv(write_csv("a,b\n1,2\nn/a,4\n5,oops\n"))
