"""Analytical store: star schema, snowflake normalization, aggregates, reports.

The engine is a small star-schema warehouse: descriptive attributes live in
dimension tables keyed by surrogate ids, measured events live in a fact table
referencing every dimension, and precomputed aggregate cubes answer grouped
queries without rescanning facts.  Dimensions may declare hierarchies (an
attribute whose parent is either a coarser attribute of the same dimension or
the key of another dimension); those hierarchies drive snowflake
normalization and rollup/drilldown.

All measures are integers (currency is fixed-point cents, durations are
milliseconds), so the cube path, the scan path, and any brute-force oracle
agree exactly, with no floating-point error budget.

The product-sales binding at the bottom loads completed work orders from an
operational store once their wrinkle time has passed, keeps a load ledger for
idempotence, and produces the turn-around-time and sales reports.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional

from .timebase import fmt_ts, parse_ts
from .workorders import EventKind, OrderStatus, WorkCenter, WorkOrder

DEFAULT_WRINKLE = 86_400.0  # a simulated day; standard products settle in 24h


class WarehouseError(Exception):
    pass


class SchemaMismatch(WarehouseError):
    pass


class UnknownAttribute(WarehouseError):
    pass


class CyclicHierarchy(WarehouseError):
    pass


class DanglingReference(WarehouseError):
    pass


# ---------------------------------------------------------------------------
# Schema


@dataclass(frozen=True)
class Attribute:
    """One dimension attribute; ``parent`` points a hierarchy edge at either a
    coarser attribute of the same dimension or another dimension's key."""

    name: str
    parent: Optional[str] = None


@dataclass(frozen=True)
class Dimension:
    name: str
    attributes: tuple[Attribute, ...]

    @property
    def key(self) -> str:
        return self.attributes[0].name


@dataclass(frozen=True)
class StarSchema:
    fact: str
    measures: tuple[str, ...]
    dimensions: tuple[Dimension, ...]

    def validate_schema(self) -> None:
        dim_names = [d.name for d in self.dimensions]
        if len(set(dim_names)) != len(dim_names):
            raise SchemaMismatch("dimension names must be unique")
        attrs: dict[str, str] = {}
        for dim in self.dimensions:
            for attr in dim.attributes:
                if attr.name in attrs:
                    raise SchemaMismatch(f"attribute {attr.name!r} declared twice")
                attrs[attr.name] = dim.name
        overlap = set(self.measures) & set(attrs)
        if len(set(self.measures)) != len(self.measures) or overlap:
            raise SchemaMismatch("measure names must be unique and distinct "
                                 "from attributes")
        keys = {d.key for d in self.dimensions}
        for dim in self.dimensions:
            for attr in dim.attributes:
                if attr.parent is None:
                    continue
                same_dim = attrs.get(attr.parent) == dim.name
                cross_key = attr.parent in keys and attrs.get(attr.parent) != dim.name
                if not (same_dim or cross_key):
                    raise SchemaMismatch(
                        f"{attr.name!r}: parent {attr.parent!r} is neither a "
                        f"sibling attribute nor another dimension's key"
                    )
        # hierarchy edges must be acyclic
        edges = {}
        for dim in self.dimensions:
            for attr in dim.attributes:
                if attr.parent is not None:
                    edges[attr.name] = attr.parent
        for start in edges:
            seen = {start}
            node = start
            while node in edges:
                node = edges[node]
                if node in seen:
                    raise CyclicHierarchy(f"hierarchy cycle through {node!r}")
                seen.add(node)

    def dimension(self, name: str) -> Dimension:
        for dim in self.dimensions:
            if dim.name == name:
                return dim
        raise SchemaMismatch(f"no dimension {name!r}")

    def attribute_index(self) -> dict[str, tuple[str, bool]]:
        """attr name -> (owning dimension, is_cross_dim_parent_copy=False)."""
        index = {}
        for dim in self.dimensions:
            for attr in dim.attributes:
                index[attr.name] = (dim.name, False)
        return index


def star_columns(schema: StarSchema, dim: Dimension) -> list[str]:
    """Denormalized column list: declared attributes plus a value column for
    every cross-dimension hierarchy parent."""
    own = {a.name for a in dim.attributes}
    cols = [a.name for a in dim.attributes]
    for attr in dim.attributes:
        if attr.parent is not None and attr.parent not in own:
            cols.append(attr.parent)
    return cols


# ---------------------------------------------------------------------------
# Tables and the star warehouse


class DimTable:
    """Surrogate-keyed dimension rows; identical value tuples share one id."""

    def __init__(self, name: str, columns: list[str]):
        self.name = name
        self.columns = columns
        self.rows: list[dict] = []
        self._index: dict[tuple, int] = {}

    def upsert(self, values: dict) -> int:
        key = tuple(values[c] for c in self.columns)
        row_id = self._index.get(key)
        if row_id is None:
            row_id = len(self.rows) + 1
            row = {"id": row_id}
            row.update({c: values[c] for c in self.columns})
            self.rows.append(row)
            self._index[key] = row_id
        return row_id

    def row(self, row_id: int) -> dict:
        return self.rows[row_id - 1]


@dataclass(frozen=True)
class Measure:
    kind: str  # COUNT | SUM | AVG
    field: Optional[str] = None

    @property
    def label(self) -> str:
        return self.kind if self.field is None else f"{self.kind}({self.field})"


COUNT = Measure("COUNT")


def sum_of(field: str) -> Measure:
    return Measure("SUM", field)


def avg_of(field: str) -> Measure:
    return Measure("AVG", field)


@dataclass(frozen=True)
class WarehouseQuery:
    group_by: tuple[str, ...]
    measure: Measure
    filters: tuple[tuple[str, str], ...] = ()


class AggregateCube:
    """Precomputed group-bys: subset of attributes -> value tuple -> sums."""

    def __init__(self):
        self.tables: dict[tuple[str, ...], dict[tuple, dict[str, int]]] = {}

    def subsets(self) -> list[tuple[str, ...]]:
        return sorted(self.tables)


class StarWarehouse:
    """Facts plus dimension tables for one star schema."""

    def __init__(self, schema: StarSchema):
        schema.validate_schema()
        self.schema = schema
        self.dims: dict[str, DimTable] = {
            d.name: DimTable(d.name, star_columns(schema, d))
            for d in schema.dimensions
        }
        self.facts: list[dict] = []
        self.cube = AggregateCube()
        self._attr_owner: dict[str, str] = {
            a.name: d.name for d in schema.dimensions for a in d.attributes
        }
        self._lock = threading.RLock()

    # -- loading ---------------------------------------------------------

    def add_fact(self, dim_values: dict[str, dict], measures: dict[str, int],
                 tag: Optional[str] = None) -> dict:
        """Upsert one row per dimension, then append the fact.

        ``dim_values`` maps dimension name to its full column dict;
        ``measures`` must cover every schema measure with a non-negative int.
        """
        with self._lock:
            fact: dict = {}
            for dim in self.schema.dimensions:
                values = dim_values.get(dim.name)
                if values is None:
                    raise SchemaMismatch(f"missing values for dimension {dim.name!r}")
                fact[dim.name] = self.dims[dim.name].upsert(values)
            for m in self.schema.measures:
                value = measures.get(m)
                if not isinstance(value, int) or value < 0:
                    raise SchemaMismatch(f"measure {m!r} must be a non-negative int")
                fact[m] = value
            if tag is not None:
                fact["_tag"] = tag
            self.facts.append(fact)
            return fact

    # -- attribute resolution ---------------------------------------------

    def attr_value(self, fact: dict, attr: str):
        dim = self._attr_owner.get(attr)
        if dim is None:
            raise UnknownAttribute(f"no attribute {attr!r}")
        return self.dims[dim].row(fact[dim])[attr]

    def attr_parent(self, attr: str) -> Optional[str]:
        dim_name = self._attr_owner.get(attr)
        if dim_name is None:
            raise UnknownAttribute(f"no attribute {attr!r}")
        for a in self.schema.dimension(dim_name).attributes:
            if a.name == attr:
                return a.parent
        return None

    def _check_attrs(self, attrs: Iterable[str]) -> None:
        for attr in attrs:
            if attr not in self._attr_owner:
                raise UnknownAttribute(f"no attribute {attr!r}")

    # -- aggregates ---------------------------------------------------------

    def build_aggregates(self, subsets: list[tuple[str, ...]]) -> AggregateCube:
        """Precompute one grouped table per attribute subset (sorted order)."""
        with self._lock:
            for subset in subsets:
                self._check_attrs(subset)
                key = tuple(sorted(set(subset)))
                table: dict[tuple, dict[str, int]] = {}
                for fact in self.facts:
                    values = tuple(self.attr_value(fact, a) for a in key)
                    entry = table.get(values)
                    if entry is None:
                        entry = {"count": 0}
                        entry.update({m: 0 for m in self.schema.measures})
                        table[values] = entry
                    entry["count"] += 1
                    for m in self.schema.measures:
                        entry[m] += fact[m]
                self.cube.tables[key] = table
            return self.cube

    # -- queries ----------------------------------------------------------

    def query(self, q: WarehouseQuery, *, force: Optional[str] = None
              ) -> list[tuple[tuple, object]]:
        """Answer ``q`` in deterministic (lexicographic) group order.

        Uses a precomputed cube table when one covers the grouped and
        filtered attributes, otherwise one pass over the fact table; ``force``
        pins the path to ``"cube"`` or ``"scan"`` (tests use it to compare).
        """
        with self._lock:
            self._check_attrs(q.group_by)
            self._check_attrs(a for a, _ in q.filters)
            if q.measure.kind != "COUNT" and q.measure.field not in self.schema.measures:
                raise UnknownAttribute(f"no measure {q.measure.field!r}")
            needed = set(q.group_by) | {a for a, _ in q.filters}
            subset = self._covering_subset(needed)
            if force == "cube" and subset is None:
                raise WarehouseError("no cube table covers this query")
            if force != "scan" and subset is not None:
                groups = self._aggregate_from_cube(q, subset)
            else:
                groups = self._aggregate_from_facts(q)
            rows = []
            for key in sorted(groups):
                entry = groups[key]
                rows.append((key, self._finish(q.measure, entry)))
            return rows

    def _covering_subset(self, needed: set[str]) -> Optional[tuple[str, ...]]:
        candidates = [s for s in self.cube.tables if needed <= set(s)]
        if not candidates:
            return None
        return min(candidates, key=lambda s: (len(s), s))

    def _aggregate_from_cube(self, q: WarehouseQuery,
                             subset: tuple[str, ...]) -> dict[tuple, dict]:
        pos = {a: i for i, a in enumerate(subset)}
        groups: dict[tuple, dict[str, int]] = {}
        for values, entry in self.cube.tables[subset].items():
            if any(values[pos[a]] != v for a, v in q.filters):
                continue
            key = tuple(values[pos[a]] for a in q.group_by)
            acc = groups.get(key)
            if acc is None:
                acc = {"count": 0}
                acc.update({m: 0 for m in self.schema.measures})
                groups[key] = acc
            acc["count"] += entry["count"]
            for m in self.schema.measures:
                acc[m] += entry[m]
        return groups

    def _aggregate_from_facts(self, q: WarehouseQuery) -> dict[tuple, dict]:
        groups: dict[tuple, dict[str, int]] = {}
        for fact in self.facts:
            if any(self.attr_value(fact, a) != v for a, v in q.filters):
                continue
            key = tuple(self.attr_value(fact, a) for a in q.group_by)
            acc = groups.get(key)
            if acc is None:
                acc = {"count": 0}
                acc.update({m: 0 for m in self.schema.measures})
                groups[key] = acc
            acc["count"] += 1
            for m in self.schema.measures:
                acc[m] += fact[m]
        return groups

    @staticmethod
    def _finish(measure: Measure, entry: dict[str, int]):
        if measure.kind == "COUNT":
            return entry["count"]
        if measure.kind == "SUM":
            return entry[measure.field]
        # AVG is kept as an exact (sum, count) division; means do not
        # re-aggregate, so they are excluded from additivity checks.
        return entry[measure.field] / entry["count"]

    # -- rollup / drilldown -------------------------------------------------

    def rollup(self, q: WarehouseQuery) -> WarehouseQuery:
        """Coarsen the finest (last) grouping attribute along its hierarchy;
        attributes without a parent are dropped."""
        if not q.group_by:
            return q
        last = q.group_by[-1]
        parent = self.attr_parent(last)
        if parent is not None and parent not in q.group_by:
            return replace(q, group_by=q.group_by[:-1] + (parent,))
        return replace(q, group_by=q.group_by[:-1])

    def drilldown(self, q: WarehouseQuery, attr: str) -> WarehouseQuery:
        self._check_attrs([attr])
        return replace(q, group_by=q.group_by + (attr,))


# ---------------------------------------------------------------------------
# Snowflake normalization


@dataclass
class SnowTable:
    name: str
    columns: list[str]  # value columns
    refs: dict[str, str]  # parent attribute -> referenced table name
    rows: list[dict]  # id, value columns, and <attr>_ref id columns
    key: str  # the attribute this table is keyed on (for ref resolution)


@dataclass
class SnowflakeWarehouse:
    schema: StarSchema
    tables: dict[str, SnowTable]
    facts: list[dict]

    def attr_value(self, fact: dict, attr: str):
        table = self.tables[self._attr_owner[attr]]
        row = table.rows[fact[table.name] - 1]
        return self._resolve(table, row, attr)

    def _resolve(self, table: SnowTable, row: dict, attr: str):
        if attr in table.columns:
            return row[attr]
        for parent_attr, ref_table_name in table.refs.items():
            ref_table = self.tables[ref_table_name]
            ref_row = ref_table.rows[row[f"{parent_attr}_ref"] - 1]
            try:
                return self._resolve(ref_table, ref_row, attr)
            except UnknownAttribute:
                continue
        raise UnknownAttribute(f"attribute {attr!r} unreachable from {table.name}")

    def __post_init__(self):
        self._attr_owner = {}
        for dim in self.schema.dimensions:
            for a in dim.attributes:
                self._attr_owner[a.name] = dim.name

    def query(self, q: WarehouseQuery) -> list[tuple[tuple, object]]:
        """Scan-path query over the normalized layout (no cube)."""
        groups: dict[tuple, dict[str, int]] = {}
        for fact in self.facts:
            if any(self.attr_value(fact, a) != v for a, v in q.filters):
                continue
            key = tuple(self.attr_value(fact, a) for a in q.group_by)
            acc = groups.setdefault(
                key, {"count": 0, **{m: 0 for m in self.schema.measures}}
            )
            acc["count"] += 1
            for m in self.schema.measures:
                acc[m] += fact[m]
        return [
            (key, StarWarehouse._finish(q.measure, groups[key]))
            for key in sorted(groups)
        ]


def normalize_to_snowflake(wh: StarWarehouse) -> SnowflakeWarehouse:
    """Split every hierarchy level into its own surrogate-keyed table.

    An attribute whose parent lives in the same dimension moves that parent
    into a ``<dimension>_<parent>`` table; a parent that is another
    dimension's key becomes a plain foreign reference to that dimension's
    table.  Re-joining reproduces the star rows exactly and every query
    answers identically.
    """
    schema = wh.schema
    schema.validate_schema()
    tables: dict[str, SnowTable] = {}

    for dim in schema.dimensions:
        own = {a.name: a for a in dim.attributes}
        intra_parents = {
            a.parent for a in dim.attributes
            if a.parent is not None and a.parent in own
        }
        # Parent-level tables, one per intra-dimension hierarchy level.
        for parent_name in intra_parents:
            parent_attr = own[parent_name]
            refs = {}
            if parent_attr.parent is not None:
                if parent_attr.parent in own:
                    refs[parent_attr.parent] = f"{dim.name}_{parent_attr.parent}"
                else:
                    refs[parent_attr.parent] = _owning_dim(schema, parent_attr.parent)
            tables[f"{dim.name}_{parent_name}"] = SnowTable(
                name=f"{dim.name}_{parent_name}",
                columns=[parent_name],
                refs=refs,
                rows=[],
                key=parent_name,
            )
        # The dimension's main table: everything not hoisted to a level table.
        main_cols = [a.name for a in dim.attributes if a.name not in intra_parents]
        refs = {}
        for a in dim.attributes:
            if a.name in intra_parents or a.parent is None:
                continue
            refs[a.parent] = (
                f"{dim.name}_{a.parent}" if a.parent in own
                else _owning_dim(schema, a.parent)
            )
        tables[dim.name] = SnowTable(
            name=dim.name, columns=main_cols, refs=refs, rows=[], key=dim.key
        )

    # Populate dimension tables first so cross-dimension refs can resolve.
    for dim in schema.dimensions:
        star_table = wh.dims[dim.name]
        for star_row in star_table.rows:
            _insert_snowflake_row(tables, schema, dim, star_row)

    return SnowflakeWarehouse(schema=schema, tables=tables, facts=list(wh.facts))


def _owning_dim(schema: StarSchema, attr: str) -> str:
    for dim in schema.dimensions:
        if any(a.name == attr for a in dim.attributes):
            return dim.name
    raise SchemaMismatch(f"attribute {attr!r} has no owning dimension")


def _insert_snowflake_row(tables: dict[str, SnowTable], schema: StarSchema,
                          dim: Dimension, star_row: dict) -> None:
    own = {a.name: a for a in dim.attributes}

    def level_id(table_name: str, attr_name: str) -> int:
        table = tables[table_name]
        row_values = {attr_name: star_row[attr_name]}
        ref_ids = {}
        attr = own.get(attr_name)
        if attr is not None and attr.parent is not None:
            if attr.parent in own:
                ref_ids[f"{attr.parent}_ref"] = level_id(
                    f"{dim.name}_{attr.parent}", attr.parent
                )
            else:
                ref_ids[f"{attr.parent}_ref"] = _cross_ref(
                    tables, schema, attr.parent, star_row[attr.parent]
                )
        return _upsert_snow(table, row_values, ref_ids)

    main = tables[dim.name]
    row_values = {c: star_row[c] for c in main.columns}
    ref_ids = {}
    for parent_attr, ref_table in main.refs.items():
        if ref_table.startswith(f"{dim.name}_"):
            ref_ids[f"{parent_attr}_ref"] = level_id(ref_table, parent_attr)
        else:
            ref_ids[f"{parent_attr}_ref"] = _cross_ref(
                tables, schema, parent_attr, star_row[parent_attr]
            )
    # Keep the star surrogate id so fact rows stay valid unchanged.
    _upsert_snow(main, row_values, ref_ids, forced_id=star_row["id"])


def _cross_ref(tables: dict[str, SnowTable], schema: StarSchema,
               attr: str, value) -> int:
    table = tables[_owning_dim(schema, attr)]
    for row in table.rows:
        if row[attr] == value:
            return row["id"]
    raise DanglingReference(
        f"no {table.name} row with {attr}={value!r}; load dimensions before "
        f"normalizing"
    )


def _upsert_snow(table: SnowTable, values: dict, refs: dict,
                 forced_id: Optional[int] = None) -> int:
    for row in table.rows:
        if all(row[k] == v for k, v in values.items()) and all(
            row[k] == v for k, v in refs.items()
        ):
            return row["id"]
    row_id = forced_id if forced_id is not None else len(table.rows) + 1
    row = {"id": row_id}
    row.update(values)
    row.update(refs)
    table.rows.append(row)
    return row_id


def denormalize(sf: SnowflakeWarehouse) -> dict[str, list[dict]]:
    """Re-join the snowflake tables back into star dimension rows."""
    out: dict[str, list[dict]] = {}
    star = StarWarehouse(sf.schema)  # for the column layout only
    for dim in sf.schema.dimensions:
        table = sf.tables[dim.name]
        columns = star.dims[dim.name].columns
        rows = []
        for row in table.rows:
            flat = {"id": row["id"]}
            for col in columns:
                flat[col] = sf._resolve(table, row, col)
            rows.append(flat)
        out[dim.name] = rows
    return out


# ---------------------------------------------------------------------------
# Delimited-text persistence (tab-separated, header row, backslash escaping)


def _escape(value: str) -> str:
    return (
        value.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")
    )


def _unescape(value: str) -> str:
    out = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\" and i + 1 < len(value):
            nxt = value[i + 1]
            out.append({"t": "\t", "n": "\n", "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def write_table(path: Path, columns: list[str], rows: list[list[str]]) -> None:
    lines = ["\t".join(_escape(c) for c in columns)]
    for row in rows:
        lines.append("\t".join(_escape(str(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_table(path: Path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines:
        return [], []
    columns = [_unescape(c) for c in lines[0].split("\t")]
    rows = [[_unescape(v) for v in line.split("\t")] for line in lines[1:]]
    return columns, rows


# ---------------------------------------------------------------------------
# Product-sales binding


def parse_money(text: str) -> int:
    """'1234.56' -> 123456 cents; bare ints are whole currency units."""
    text = text.strip()
    if "." in text:
        whole, _, frac = text.partition(".")
        if len(frac) != 2 or not (whole + frac).isdigit():
            raise ValueError(f"bad money value {text!r}")
        return int(whole) * 100 + int(frac)
    if not text.isdigit():
        raise ValueError(f"bad money value {text!r}")
    return int(text) * 100


def format_money(cents: int) -> str:
    return f"{cents // 100}.{cents % 100:02d}"


# Launch years for the shipped satellite catalog; purely descriptive
# dimension data, unknown satellites fall back to 0.
SATELLITE_LAUNCH_YEARS = {
    "IRS-1A": 1988,
    "IRS-P5": 2005,
    "IRS-P6": 2003,
    "CARTOSAT-2": 2007,
}

PRODUCT_SALES_SCHEMA = StarSchema(
    fact="product_sales",
    measures=("quantity", "amount", "tat_ms"),
    dimensions=(
        Dimension("customer", (Attribute("customer", parent="region"),
                               Attribute("region"))),
        Dimension("satellite", (Attribute("satellite"),
                                Attribute("launch_year"))),
        Dimension("sensor", (Attribute("sensor", parent="satellite"),)),
        Dimension("product_type", (Attribute("product_type"),)),
        Dimension("correction_level", (Attribute("correction_level"),)),
    ),
)


@dataclass(frozen=True)
class FactRow:
    """Typed view of one product-sales fact."""

    order_id: str
    customer_id: int
    satellite_id: int
    sensor_id: int
    product_type_id: int
    correction_level_id: int
    quantity: int
    amount: int  # cents
    tat_ms: int


@dataclass(frozen=True)
class CenterVisit:
    order_id: str
    center: WorkCenter
    entered_at: float
    exited_at: float

    @property
    def duration_ms(self) -> int:
        return round((self.exited_at - self.entered_at) * 1000)


@dataclass
class EtlReport:
    facts_added: int
    rows_skipped: int


class ProductSalesWarehouse(StarWarehouse):
    """The star warehouse for completed product orders, fed by ETL."""

    def __init__(self):
        super().__init__(PRODUCT_SALES_SCHEMA)
        self.loaded_orders: dict[str, int] = {}  # order id -> amount cents
        self.center_visits: list[CenterVisit] = []
        self._cube_subsets: list[tuple[str, ...]] = []

    # -- ETL ---------------------------------------------------------------

    def etl_run(self, store, wrinkle: float = DEFAULT_WRINKLE,
                now: float = 0.0) -> EtlReport:
        """Load completed orders whose last update is at least ``wrinkle`` old.

        Idempotent: the load ledger keeps every order out of the fact table
        after its first load, so an immediate rerun adds nothing.
        """
        added = 0
        skipped = 0
        with self._lock:
            for wo_id in store.all_ids():
                wo = store.load(wo_id)
                if wo.status is not OrderStatus.COMPLETED:
                    continue
                # Eligible once last_update + wrinkle <= now (inclusive); this
                # form keeps the boundary exact under float arithmetic.
                if wo_id in self.loaded_orders or wo.last_update_at() + wrinkle > now:
                    skipped += 1
                    continue
                self._load_order(wo)
                added += 1
            if added and self._cube_subsets:
                self.cube = AggregateCube()
                self.build_aggregates(self._cube_subsets)
        return EtlReport(facts_added=added, rows_skipped=skipped)

    def _load_order(self, wo: WorkOrder) -> None:
        params = wo.parameters
        customer = params.get("customer", "UNKNOWN")
        region = params.get("region", "UNKNOWN")
        amount = parse_money(params.get("amount", "0.00"))
        quantity = int(params.get("quantity", "1"))
        tat_ms = round((wo.completed_at() - wo.created_at) * 1000)
        self.add_fact(
            dim_values={
                "customer": {"customer": customer, "region": region},
                "satellite": {
                    "satellite": wo.spec.satellite,
                    "launch_year": SATELLITE_LAUNCH_YEARS.get(wo.spec.satellite, 0),
                },
                "sensor": {"sensor": wo.spec.sensor,
                           "satellite": wo.spec.satellite},
                "product_type": {"product_type": wo.spec.product_type.value},
                "correction_level": {
                    "correction_level": wo.spec.correction_level.value
                },
            },
            measures={"quantity": quantity, "amount": amount, "tat_ms": tat_ms},
            tag=wo.id,
        )
        self.loaded_orders[wo.id] = amount
        self.center_visits.extend(visits_from_history(wo))

    def build_aggregates(self, subsets: list[tuple[str, ...]]) -> AggregateCube:
        cube = super().build_aggregates(subsets)
        for subset in subsets:
            key = tuple(sorted(set(subset)))
            if key not in self._cube_subsets:
                self._cube_subsets.append(key)
        return cube

    # -- reports ------------------------------------------------------------

    def report_tat(self, by: str) -> tuple[list[str], list[list]]:
        """Mean turn-around time, by work center or by product type.

        Center TAT averages every visit interval separately, so an order
        reworked through a center contributes one sample per visit.
        """
        if by.upper() == "CENTER":
            sums: dict[WorkCenter, list[int]] = {}
            for visit in self.center_visits:
                acc = sums.setdefault(visit.center, [0, 0])
                acc[0] += visit.duration_ms
                acc[1] += 1
            rows = []
            for center in WorkCenter:
                if center in sums:
                    total_ms, count = sums[center]
                    rows.append([center.value, count, total_ms / count / 1000.0])
            return ["center", "visits", "mean_seconds"], rows
        if by.upper() == "PRODUCT_TYPE":
            result = self.query(
                WarehouseQuery(group_by=("product_type",), measure=avg_of("tat_ms"))
            )
            counts = dict(
                self.query(WarehouseQuery(group_by=("product_type",), measure=COUNT))
            )
            rows = [
                [key[0], counts[key], mean_ms / 1000.0]
                for key, mean_ms in result
            ]
            return ["product_type", "orders", "mean_seconds"], rows
        raise WarehouseError(f"report_tat: unknown grouping {by!r}")

    # -- persistence ----------------------------------------------------

    def save(self, directory: Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for dim in self.schema.dimensions:
            table = self.dims[dim.name]
            write_table(
                directory / f"dim_{dim.name}.tsv",
                ["id"] + table.columns,
                [[str(r["id"])] + [str(r[c]) for c in table.columns]
                 for r in table.rows],
            )
        dim_names = [d.name for d in self.schema.dimensions]
        write_table(
            directory / f"fact_{self.schema.fact}.tsv",
            ["order"] + [f"{d}_id" for d in dim_names] + list(self.schema.measures),
            [
                [str(f.get("_tag", ""))]
                + [str(f[d]) for d in dim_names]
                + [str(f[m]) for m in self.schema.measures]
                for f in self.facts
            ],
        )
        write_table(
            directory / "center_visits.tsv",
            ["order", "center", "entered", "exited"],
            [[v.order_id, v.center.value, fmt_ts(v.entered_at), fmt_ts(v.exited_at)]
             for v in self.center_visits],
        )
        write_table(
            directory / "loaded_orders.tsv",
            ["order", "amount"],
            [[wo_id, str(cents)]
             for wo_id, cents in sorted(self.loaded_orders.items())],
        )
        for subset, table in sorted(self.cube.tables.items()):
            write_table(
                directory / f"aggregate_{'+'.join(subset)}.tsv",
                list(subset) + ["count"] + list(self.schema.measures),
                [
                    [str(v) for v in values]
                    + [str(entry["count"])]
                    + [str(entry[m]) for m in self.schema.measures]
                    for values, entry in sorted(table.items())
                ],
            )

    @classmethod
    def load(cls, directory: Path) -> "ProductSalesWarehouse":
        directory = Path(directory)
        wh = cls()
        for dim in wh.schema.dimensions:
            columns, rows = read_table(directory / f"dim_{dim.name}.tsv")
            table = wh.dims[dim.name]
            for row in rows:
                values = dict(zip(columns, row))
                numeric = {
                    c: int(values[c]) if c == "launch_year" else values[c]
                    for c in table.columns
                }
                assigned = table.upsert(numeric)
                if assigned != int(values["id"]):
                    raise WarehouseError(f"dimension {dim.name} ids out of order")
        columns, rows = read_table(directory / f"fact_{wh.schema.fact}.tsv")
        dim_names = [d.name for d in wh.schema.dimensions]
        for row in rows:
            values = dict(zip(columns, row))
            fact = {d: int(values[f"{d}_id"]) for d in dim_names}
            fact.update({m: int(values[m]) for m in wh.schema.measures})
            if values.get("order"):
                fact["_tag"] = values["order"]
            wh.facts.append(fact)
        _, rows = read_table(directory / "center_visits.tsv")
        for order_id, center, entered, exited in rows:
            wh.center_visits.append(
                CenterVisit(order_id, WorkCenter(center),
                            parse_ts(entered), parse_ts(exited))
            )
        _, rows = read_table(directory / "loaded_orders.tsv")
        for order_id, cents in rows:
            wh.loaded_orders[order_id] = int(cents)
        for agg_path in sorted(directory.glob("aggregate_*.tsv")):
            subset = tuple(agg_path.stem[len("aggregate_"):].split("+"))
            wh.build_aggregates([subset])
        return wh


def visits_from_history(wo: WorkOrder) -> list[CenterVisit]:
    """Every (entered, exited) interval in the order's history, rework runs
    included as separate visits."""
    visits = []
    open_starts: dict[WorkCenter, float] = {}
    for event in wo.history:
        if event.kind is EventKind.STARTED:
            open_starts[event.center] = event.at
        elif event.kind is EventKind.COMPLETED_STEP:
            started = open_starts.pop(event.center, None)
            if started is not None:
                visits.append(CenterVisit(wo.id, event.center, started, event.at))
    return visits


def query_result_table(q: WarehouseQuery,
                       rows: list[tuple[tuple, object]]
                       ) -> tuple[list[str], list[list[str]]]:
    """Query rows in the delimited-table shape, ready for :func:`write_table`
    or a report template."""
    columns = list(q.group_by) + [q.measure.label]
    out = [[str(v) for v in key] + [str(value)] for key, value in rows]
    return columns, out


def table_to_xml(name: str, columns: list[str], rows: list[list[str]]):
    """A table as an element tree, so report templates can style it.
    Column names are munged to valid attribute names where needed."""
    import re

    from .xmlcore import XmlNode

    def xml_name(col: str) -> str:
        out = re.sub(r"[^A-Za-z0-9_.\-]", "_", col)
        return out if re.match(r"[A-Za-z_]", out) else f"_{out}"

    attr_names = [xml_name(c) for c in columns]
    root = XmlNode(name)
    for row in rows:
        root.children.append(
            XmlNode("row",
                    attributes=dict(zip(attr_names, (str(v) for v in row))))
        )
    return root


# Query-measure vocabulary used at the service boundary.
QUERY_MEASURES = {
    "COUNT": COUNT,
    "SUM_QUANTITY": sum_of("quantity"),
    "SUM_AMOUNT": sum_of("amount"),
    "AVG_TAT": avg_of("tat_ms"),
}
