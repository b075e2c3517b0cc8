from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from optilang.exprs import (
    Call,
    Compare,
    DataEnv,
    EvalTypeError,
    GeneratorExpr,
    KeyArityError,
    MethodCall,
    MissingDataPairError,
    Name,
    NameResolutionError,
    NumberLit,
    ParseError,
    SelfAttr,
    Subscript,
    Table,
    eval_concrete,
    free_roots,
    parse_expr,
)


def make_costs() -> Table:
    return Table("costs", 1, 1, [(("bread",), (2.0,)), (("milk",), (3.5,))])


def make_env(**tables: Table) -> DataEnv:
    return DataEnv(tables=dict(tables))


class TestParser:
    def test_objective_shape(self):
        ast = parse_expr("sum(self.costs[i] * self.buy[i] for i in self.costs)")
        assert isinstance(ast, Call) and ast.func == "sum"
        (gen,) = ast.args
        assert isinstance(gen, GeneratorExpr)
        assert gen.clauses[0].targets == ("i",)
        assert gen.clauses[0].iterable == SelfAttr("costs")

    def test_indices_shape(self):
        ast = parse_expr("list(self.costs.keys())")
        assert ast == Call("list", (MethodCall("keys", SelfAttr("costs")),))

    def test_generator_of_comparison(self):
        text = (
            "(sum(self.nutr_vals[i, j] * self.buy[i] for i in self.costs)"
            " >= self.min_nutr[j] for j in self.min_nutr)"
        )
        ast = parse_expr(text)
        assert isinstance(ast, GeneratorExpr)
        assert isinstance(ast.body, Compare)
        assert ast.body.op == ">="

    def test_line_continuation_backslashes_stripped(self):
        ast = parse_expr("sum(self.costs[i] \\ for i in self.costs)")
        assert isinstance(ast, Call)

    def test_tuple_targets(self):
        ast = parse_expr("(self.pick[u] + self.pick[v] >= 1 for (u, v) in self.edges)")
        assert ast.clauses[0].targets == ("u", "v")

    def test_chained_comparison_rejected(self):
        with pytest.raises(ParseError):
            parse_expr("a < b < c")

    def test_lambda_rejected(self):
        with pytest.raises(ParseError):
            parse_expr("lambda x: x + 1")

    def test_deep_attribute_chain_rejected(self):
        with pytest.raises(ParseError):
            parse_expr("self.costs.total")

    def test_unknown_function_rejected(self):
        with pytest.raises(ParseError):
            parse_expr("sorted(self.costs)")

    def test_unknown_method_rejected(self):
        with pytest.raises(ParseError):
            parse_expr("self.costs.pop()")

    def test_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_expr("self.x +")
        assert err.value.position == 8

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ParseError):
            parse_expr("self.x[i] self.y")

    def test_numbers_and_strings(self):
        assert parse_expr("2.5") == NumberLit(2.5)
        assert parse_expr("'bread'").value == "bread"

    def test_unary_and_precedence(self):
        ast = parse_expr("-2 * 3 + 1")
        # (-2 * 3) + 1
        assert ast.op == "+"


class TestFreeRoots:
    def test_min_nutr_generator(self):
        text = (
            "(sum(self.nutr_vals[i, j] * self.buy[i] for i in self.costs)"
            " >= self.min_nutr[j] for j in self.min_nutr)"
        )
        assert free_roots(parse_expr(text)) == {"nutr_vals", "buy", "costs", "min_nutr"}

    def test_loop_variable_excluded(self):
        assert free_roots(parse_expr("sum(i for i in self.costs)")) == {"costs"}

    def test_if_clause_roots_included(self):
        text = "sum(self.x[k] for k in self.y if self.z[k] > 0)"
        assert free_roots(parse_expr(text)) == {"x", "y", "z"}

    def test_unbound_bare_name_is_a_root(self):
        assert free_roots(parse_expr("sum(w for i in self.costs)")) == {"costs", "w"}

    @given(st.sampled_from(["i", "k", "item", "zz"]))
    def test_alpha_equivalence(self, loop_name):
        template = "sum(self.costs[{v}] * self.buy[{v}] for {v} in self.costs)"
        renamed = free_roots(parse_expr(template.format(v=loop_name)))
        baseline = free_roots(parse_expr(template.format(v="i")))
        assert renamed == baseline


class TestEvalConcrete:
    def test_keys_listing(self):
        env = make_env(costs=make_costs())
        assert eval_concrete(parse_expr("list(self.costs.keys())"), env) == ["bread", "milk"]

    def test_len(self):
        env = make_env(costs=make_costs())
        assert eval_concrete(parse_expr("len(self.costs)"), env) == 2

    def test_sum_over_table(self):
        env = make_env(costs=make_costs())
        total = eval_concrete(parse_expr("sum(self.costs[i] for i in self.costs)"), env)
        assert total == pytest.approx(5.5)

    def test_iteration_order_is_insertion_order(self):
        table = Table("t", 1, 1, [(("z",), (1.0,)), (("a",), (2.0,))])
        env = make_env(t=table)
        assert eval_concrete(parse_expr("list(self.t.keys())"), env) == ["z", "a"]

    def test_values_and_items(self):
        env = make_env(costs=make_costs())
        assert eval_concrete(parse_expr("list(self.costs.values())"), env) == [2.0, 3.5]
        assert eval_concrete(parse_expr("list(self.costs.items())"), env) == [
            ("bread", 2.0),
            ("milk", 3.5),
        ]

    def test_min_max_abs(self):
        env = make_env(costs=make_costs())
        assert eval_concrete(parse_expr("min(self.costs.values())"), env) == 2.0
        assert eval_concrete(parse_expr("max(self.costs.values())"), env) == 3.5
        assert eval_concrete(parse_expr("abs(0 - 3)"), env) == 3

    def test_tuple_key_subscript(self):
        table = Table("m", 2, 1, [(("a", "x"), (7.0,))])
        env = make_env(m=table)
        assert eval_concrete(parse_expr("self.m['a', 'x']"), env) == 7.0

    def test_composite_key_through_single_binding(self):
        table = Table("m", 2, 1, [(("a", "x"), (7.0,))])
        env = make_env(m=table)
        assert eval_concrete(parse_expr("sum(self.m[k] for k in self.m)"), env) == 7.0

    def test_unknown_root(self):
        with pytest.raises(NameResolutionError):
            eval_concrete(parse_expr("self.nothing"), make_env())

    def test_key_arity_mismatch(self):
        env = make_env(costs=make_costs())
        with pytest.raises(KeyArityError):
            eval_concrete(parse_expr("self.costs['bread', 'extra']"), env)

    def test_type_error(self):
        env = make_env(costs=make_costs())
        with pytest.raises(EvalTypeError):
            eval_concrete(parse_expr("'bread' * 2"), env)

    def test_missing_pair_policies(self):
        table = Table("m", 2, 1, [(("a", "x"), (7.0,))])
        strict = DataEnv(tables={"m": table}, missing_policy="error")
        with pytest.raises(MissingDataPairError):
            eval_concrete(parse_expr("self.m['a', 'y']"), strict)
        lenient = DataEnv(tables={"m": table}, missing_policy="zero")
        assert eval_concrete(parse_expr("self.m['a', 'y']"), lenient) == 0.0

    def test_generator_with_filter(self):
        env = make_env(costs=make_costs())
        kept = eval_concrete(
            parse_expr("sum(self.costs[i] for i in self.costs if self.costs[i] >= 3)"), env
        )
        assert kept == pytest.approx(3.5)

    def test_nested_generators_cartesian(self):
        a = Table("a", 1, 1, [(("p",), (1.0,)), (("q",), (2.0,))])
        b = Table("b", 1, 1, [(("x",), (10.0,)), (("y",), (20.0,)), (("z",), (30.0,))])
        env = make_env(a=a, b=b)
        total = eval_concrete(
            parse_expr("sum(self.a[i] * self.b[j] for i in self.a for j in self.b)"), env
        )
        assert total == pytest.approx((1 + 2) * (10 + 20 + 30))
