# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from linmeld.checker.locality import check_locality
from linmeld.checker.types import (
    ANY,
    BOOL,
    FLOAT,
    INT,
    NODE,
    TypeEnv,
    compatible,
    is_numeric,
    type_of_value,
    unify_types,
)
from linmeld.engine.evaluate import Environment, evaluate
from linmeld.engine.plan import (
    AssignStep,
    CheckStep,
    MatchStep,
    Step,
    UnresolvedConstraints,
    body_templates,
    build_plan,
    flatten_body,
)
from linmeld.errors import (
    CheckError,
    ConstraintError,
    Diagnostic,
    LinearMeldError,
    LocalityViolation,
)
from linmeld.language.parser import parse, parse_expression
from linmeld.language.printer import format_template
from linmeld.language.syntax import (
    Aggregate,
    AggregateOperation,
    Binary,
    BodyTerm,
    Call,
    Comprehension,
    ConstRef,
    Exists,
    Expr,
    FactTemplate,
    ListExpr,
    Literal,
    Location,
    One,
    PairExpr,
    PredicateDecl,
    Program,
    Rule,
    SelectorOperation,
    TypeExpr,
    Unary,
    Var,
    Wildcard,
    World,
    expr_variables,
    list_of,
    pair_of,
    template_variables,
)
from linmeld.models.fact import Fact
from linmeld.models.values import Value

logger = logging.getLogger(__name__)


@dataclass(frozen=True, kw_only=True)
class TypedRule:
    rule: Rule
    home: str
    variables: Mapping[str, TypeExpr]
    plan: tuple[Step, ...]
    # plans of comprehension and aggregate bodies by head position
    sub_plans: Mapping[int, tuple[Step, ...]] = field(default_factory=dict)
    accumulator_types: Mapping[tuple[int, str], TypeExpr] = field(
        default_factory=dict
    )
    linear_predicates: frozenset[str] = frozenset()

    @property
    def priority(self) -> int:
        return self.rule.priority


@dataclass(frozen=True, kw_only=True)
class TypedProgram:
    """
    A checked program ready to be loaded and run

    ``universal_axioms`` hold axioms like ``start(A).`` whose only variable
    is the first argument. They are asserted once at every node.
    """

    program: Program
    predicates: Mapping[str, PredicateDecl]
    constants: Mapping[str, Value]
    rules: tuple[TypedRule, ...]
    axioms: tuple[Fact, ...]
    universal_axioms: tuple[FactTemplate, ...] = ()

    def environment(self, world: int = 0) -> Environment:
        return Environment(constants=self.constants, world=world)

    def is_linear(self, predicate: str) -> bool:
        return self.predicates[predicate].linear


def parse_override(text: str) -> tuple[str, Value]:
    """
    Parse a ``name=value`` constant override such as ``startnode=@1``

    Raises:
        LinearMeldError: The text is not a name followed by a literal value
    """
    name, separator, value_text = text.partition("=")
    name = name.strip()
    if not separator or not name:
        raise LinearMeldError(f"invalid constant override {text!r}")
    expr = parse_expression(value_text)
    try:
        return name, evaluate(expr, {}, Environment())
    except ConstraintError as e:
        raise LinearMeldError(
            f"constant {name} needs a literal value: {e}"
        ) from None


class Checker:
    def __init__(
        self, program: Program, overrides: Optional[Mapping[str, Value]] = None
    ) -> None:
        self._program = program
        self._overrides = dict(overrides or {})
        self._diagnostics: list[Diagnostic] = []
        self._predicates: dict[str, PredicateDecl] = {}
        self._constants: dict[str, Value] = {}

    def _diag(
        self,
        code: str,
        message: str,
        location: Optional[Location],
        rule: Optional[Rule] = None,
    ) -> None:
        if location is None and rule is not None:
            location = rule.location
        self._diagnostics.append(
            Diagnostic(
                code=code,
                message=message,
                line=location.line if location else 0,
                column=location.column if location else 0,
                rule=rule.priority if rule else None,
            )
        )

    def check(self) -> TypedProgram:
        self._check_declarations()
        self._resolve_constants()
        rules = tuple(
            typed
            for typed in map(self._check_rule, self._program.rules)
            if typed is not None
        )
        axioms, universal = self._check_axioms()

        if self._diagnostics:
            raise CheckError(self._diagnostics)

        logger.debug(
            "Checked %d rules, %d axioms and %d universal axioms",
            len(rules),
            len(axioms),
            len(universal),
        )
        return TypedProgram(
            program=self._program,
            predicates=self._predicates,
            constants=self._constants,
            rules=rules,
            axioms=axioms,
            universal_axioms=universal,
        )

    # declarations and constants

    def _check_declarations(self) -> None:
        for decl in self._program.declarations:
            if decl.name in self._predicates:
                self._diag(
                    "InvalidDeclaration",
                    f"predicate {decl.name} is declared twice",
                    decl.location,
                )
                continue
            if not decl.arg_types or decl.arg_types[0] != NODE:
                self._diag(
                    "InvalidDeclaration",
                    f"the first argument of {decl.name} must be a node",
                    decl.location,
                )
            self._predicates[decl.name] = decl

    def _resolve_constants(self) -> None:
        for const in self._program.constants:
            if const.name in self._overrides:
                self._constants[const.name] = self._overrides[const.name]
                continue
            try:
                self._constants[const.name] = evaluate(
                    const.expr, {}, Environment(constants=self._constants)
                )
            except ConstraintError as e:
                self._diag(
                    "InvalidConstant",
                    f"constant {const.name} can not be evaluated: {e}",
                    const.location,
                )
        for name, value in self._overrides.items():
            self._constants.setdefault(name, value)

    # expressions

    def _infer(
        self,
        expr: Expr,
        env: TypeEnv,
        rule: Optional[Rule],
        unbound_code: str = "UnboundVariable",
    ) -> Optional[TypeExpr]:
        if isinstance(expr, Literal):
            return type_of_value(expr.value)
        if isinstance(expr, Var):
            if expr.name in env.variables:
                return env.variables[expr.name]
            self._diag(
                unbound_code,
                f"variable {expr.name} is not bound",
                expr.location,
                rule,
            )
            return None
        if isinstance(expr, Wildcard):
            self._diag(
                unbound_code,
                "_ can not be used as a value",
                expr.location,
                rule,
            )
            return None
        if isinstance(expr, ConstRef):
            const_type = env.constant_type(expr.name)
            if const_type is None:
                self._diag(
                    "UnknownConstant",
                    f"constant {expr.name} is not defined, "
                    f"use --const {expr.name}=VALUE",
                    expr.location,
                    rule,
                )
            return const_type
        if isinstance(expr, World):
            return INT
        if isinstance(expr, Unary):
            operand = self._infer(expr.operand, env, rule, unbound_code)
            if operand is not None and not is_numeric(operand):
                self._diag(
                    "TypeMismatch",
                    f"can not negate a value of type {operand}",
                    expr.location,
                    rule,
                )
                return None
            return operand
        if isinstance(expr, Binary):
            return self._infer_binary(expr, env, rule, unbound_code)
        if isinstance(expr, Call):
            return self._infer_call(expr, env, rule, unbound_code)
        if isinstance(expr, ListExpr):
            element: Optional[TypeExpr] = ANY
            for item in expr.items:
                item_type = self._infer(item, env, rule, unbound_code)
                if item_type is None or element is None:
                    element = None
                    continue
                merged = unify_types(element, item_type)
                if merged is None:
                    self._diag(
                        "TypeMismatch",
                        f"list mixes {element} and {item_type}",
                        expr.location,
                        rule,
                    )
                element = merged
            if element is None:
                return None
            result = list_of(element)
            if expr.tail is not None:
                tail = self._infer(expr.tail, env, rule, unbound_code)
                if tail is None:
                    return None
                merged = unify_types(result, tail)
                if merged is None:
                    self._diag(
                        "TypeMismatch",
                        f"list tail of type {tail} does not fit {result}",
                        expr.location,
                        rule,
                    )
                return merged
            return result
        if isinstance(expr, PairExpr):
            first = self._infer(expr.first, env, rule, unbound_code)
            second = self._infer(expr.second, env, rule, unbound_code)
            if first is None or second is None:
                return None
            return pair_of(first, second)
        return None

    def _infer_binary(
        self,
        expr: Binary,
        env: TypeEnv,
        rule: Optional[Rule],
        unbound_code: str,
    ) -> Optional[TypeExpr]:
        left = self._infer(expr.left, env, rule, unbound_code)
        right = self._infer(expr.right, env, rule, unbound_code)
        op = expr.op
        if op in ("||", "&&"):
            for operand in (left, right):
                if operand is not None and operand != BOOL:
                    self._diag(
                        "TypeMismatch",
                        f"operator {op} needs bool operands, got {operand}",
                        expr.location,
                        rule,
                    )
            return BOOL
        if left is None or right is None:
            return BOOL if op in ("=", "<>", "<", "<=", ">", ">=") else None
        if op in ("=", "<>"):
            if not compatible(left, right):
                self._diag(
                    "TypeMismatch",
                    f"can not compare {left} with {right}",
                    expr.location,
                    rule,
                )
            return BOOL
        if op in ("<", "<=", ">", ">="):
            if left != right or left.kind not in (
                "int",
                "float",
                "string",
                "node",
            ):
                self._diag(
                    "TypeMismatch",
                    f"can not order {left} and {right}",
                    expr.location,
                    rule,
                )
            return BOOL
        if left != right or not is_numeric(left):
            self._diag(
                "TypeMismatch",
                f"operator {op} needs two ints or two floats, "
                f"got {left} and {right}",
                expr.location,
                rule,
            )
            return None
        return left

    def _infer_call(
        self,
        expr: Call,
        env: TypeEnv,
        rule: Optional[Rule],
        unbound_code: str,
    ) -> Optional[TypeExpr]:
        if len(expr.args) != 1:
            self._diag(
                "TypeMismatch",
                f"{expr.function} takes exactly one argument",
                expr.location,
                rule,
            )
            return None
        arg = self._infer(expr.args[0], env, rule, unbound_code)
        if arg is None:
            return None
        function = expr.function
        if function in ("float", "int") and is_numeric(arg):
            return FLOAT if function == "float" else INT
        if function == "head" and arg.kind == "list":
            return arg.args[0]
        if function == "tail" and arg.kind == "list":
            return arg
        if function in ("fst", "snd") and arg.kind == "pair":
            return arg.args[0] if function == "fst" else arg.args[1]
        self._diag(
            "TypeMismatch",
            f"{function} can not be applied to {arg}",
            expr.location,
            rule,
        )
        return None

    # templates

    def _declaration(
        self, template: FactTemplate, rule: Optional[Rule], in_body: bool
    ) -> Optional[PredicateDecl]:
        decl = self._predicates.get(template.predicate)
        if decl is None:
            self._diag(
                "UnknownPredicate",
                f"predicate {template.predicate} is not declared",
                template.location,
                rule,
            )
            return None
        if len(template.args) != len(decl.arg_types):
            self._diag(
                "TypeMismatch",
                f"{template.predicate} expects {len(decl.arg_types)} "
                f"arguments, got {len(template.args)}",
                template.location,
                rule,
            )
            return None
        if template.persistent and decl.linear:
            self._diag(
                "LinearityMismatch",
                f"linear predicate {template.predicate} is marked with !",
                template.location,
                rule,
            )
        elif in_body and not template.persistent and not decl.linear:
            self._diag(
                "LinearityMismatch",
                f"persistent predicate {template.predicate} must be "
                "matched with !",
                template.location,
                rule,
            )
        return decl

    def _pattern(
        self, expr: Expr, expected: TypeExpr, env: TypeEnv, rule: Rule
    ) -> None:
        if isinstance(expr, Wildcard):
            return
        if isinstance(expr, Var):
            known = env.variables.get(expr.name)
            if known is None:
                env.variables[expr.name] = expected
                return
            merged = unify_types(known, expected)
            if merged is None:
                self._diag(
                    "TypeMismatch",
                    f"variable {expr.name} has type {known}, "
                    f"expected {expected}",
                    expr.location,
                    rule,
                )
                return
            env.variables[expr.name] = merged
            return
        if isinstance(expr, ListExpr):
            if expected.kind != "list":
                self._diag(
                    "TypeMismatch",
                    f"list pattern where {expected} is expected",
                    expr.location,
                    rule,
                )
                return
            for item in expr.items:
                self._pattern(item, expected.args[0], env, rule)
            if expr.tail is not None:
                self._pattern(expr.tail, expected, env, rule)
            return
        if isinstance(expr, PairExpr):
            if expected.kind != "pair":
                self._diag(
                    "TypeMismatch",
                    f"pair pattern where {expected} is expected",
                    expr.location,
                    rule,
                )
                return
            self._pattern(expr.first, expected.args[0], env, rule)
            self._pattern(expr.second, expected.args[1], env, rule)
            return
        self._expect(expr, expected, env, rule, "UnboundVariable")

    def _expect(
        self,
        expr: Expr,
        expected: TypeExpr,
        env: TypeEnv,
        rule: Optional[Rule],
        unbound_code: str,
    ) -> None:
        actual = self._infer(expr, env, rule, unbound_code)
        if actual is not None and not compatible(actual, expected):
            self._diag(
                "TypeMismatch",
                f"expected {expected}, got {actual}",
                getattr(expr, "location", None),
                rule,
            )

    def _body_template(
        self, template: FactTemplate, env: TypeEnv, rule: Rule
    ) -> None:
        decl = self._declaration(template, rule, in_body=True)
        if decl is None:
            for name in template_variables(template):
                env.variables.setdefault(name, ANY)
            return
        for arg, arg_type in zip(template.args, decl.arg_types):
            self._pattern(arg, arg_type, env, rule)

    def _head_template(
        self, template: FactTemplate, env: TypeEnv, rule: Rule
    ) -> None:
        decl = self._declaration(template, rule, in_body=False)
        if decl is None:
            return
        for arg, arg_type in zip(template.args, decl.arg_types):
            self._expect(arg, arg_type, env, rule, "UnboundHeadVariable")

    # rules

    def _body(
        self,
        body: Iterable[BodyTerm],
        env: TypeEnv,
        rule: Rule,
    ) -> tuple[Step, ...]:
        body = tuple(body)
        try:
            plan = build_plan(body, env.variables)
        except UnresolvedConstraints as e:
            for constraint in e.constraints:
                missing = sorted(expr_variables(constraint.expr) - e.bound)
                self._diag(
                    "UnboundVariable",
                    f"constraint uses unbound variable {', '.join(missing)}",
                    constraint.location,
                    rule,
                )
            plan = build_plan(
                [
                    term
                    for term in flatten_body(body)
                    if term not in e.constraints
                ],
                env.variables,
            )

        for step in plan:
            if isinstance(step, MatchStep):
                self._body_template(step.template, env, rule)
            elif isinstance(step, CheckStep):
                expr = step.constraint.expr
                actual = self._infer(expr, env, rule)
                if actual is not None and actual != BOOL:
                    self._diag(
                        "TypeMismatch",
                        f"constraint has type {actual}, expected bool",
                        step.constraint.location,
                        rule,
                    )
            elif isinstance(step, AssignStep):
                actual = self._infer(step.expr, env, rule)
                env.variables[step.variable] = actual or ANY
        return plan

    def _shadowing(
        self,
        names: Iterable[str],
        env: TypeEnv,
        rule: Rule,
        location: Optional[Location],
    ) -> None:
        for name in names:
            if name in env.variables:
                self._diag(
                    "ShadowedVariable",
                    f"variable {name} is already bound in rule "
                    f"{rule.priority}",
                    location,
                    rule,
                )

    def _sub_head(
        self, terms: Iterable[object], env: TypeEnv, rule: Rule
    ) -> None:
        for term in terms:
            if isinstance(term, FactTemplate):
                self._head_template(term, env, rule)

    def _check_rule(self, rule: Rule) -> Optional[TypedRule]:
        try:
            home = check_locality(rule)
        except LocalityViolation as e:
            self._diagnostics.append(e.diagnostic)
            home = ""

        env = TypeEnv(predicates=self._predicates, constants=self._constants)
        plan = self._body(rule.body, env, rule)

        selector = rule.selector
        if selector and selector.operation is not SelectorOperation.RANDOM:
            selector_type = env.variables.get(selector.variable)
            if selector_type is None:
                self._diag(
                    "UnboundVariable",
                    f"selector variable {selector.variable} is not "
                    "bound by the body",
                    rule.location,
                    rule,
                )
            elif selector_type.kind not in ("int", "float", "string", "node"):
                self._diag(
                    "TypeMismatch",
                    f"selector variable {selector.variable} of type "
                    f"{selector_type} can not be ordered",
                    rule.location,
                    rule,
                )

        sub_plans: dict[int, tuple[Step, ...]] = {}
        accumulator_types: dict[tuple[int, str], TypeExpr] = {}
        for index, term in enumerate(rule.head):
            if isinstance(term, FactTemplate):
                self._head_template(term, env, rule)
            elif isinstance(term, One):
                continue
            elif isinstance(term, Exists):
                self._shadowing(term.variables, env, rule, term.location)
                child = env.child()
                for name in term.variables:
                    child.variables[name] = NODE
                self._sub_head(term.head, child, rule)
            elif isinstance(term, Comprehension):
                self._shadowing(term.variables, env, rule, term.location)
                child = env.child()
                sub_plans[index] = self._body(term.body, child, rule)
                self._sub_head(term.head, child, rule)
            elif isinstance(term, Aggregate):
                sub_plans[index] = self._check_aggregate(
                    index, term, env, rule, accumulator_types
                )

        linear_predicates = frozenset(
            template.predicate
            for template in body_templates(rule.body)
            if not template.persistent
        )
        return TypedRule(
            rule=rule,
            home=home,
            variables=dict(env.variables),
            plan=plan,
            sub_plans=sub_plans,
            accumulator_types=accumulator_types,
            linear_predicates=linear_predicates,
        )

    def _check_aggregate(
        self,
        index: int,
        term: Aggregate,
        env: TypeEnv,
        rule: Rule,
        accumulator_types: dict[tuple[int, str], TypeExpr],
    ) -> tuple[Step, ...]:
        accumulators = [
            accumulator.variable for accumulator in term.accumulators
        ]
        self._shadowing(
            list(term.variables) + accumulators, env, rule, term.location
        )
        child = env.child()
        plan = self._body(term.body, child, rule)

        for accumulator in term.accumulators:
            name = accumulator.variable
            if accumulator.operation is AggregateOperation.COUNT:
                accumulator_types[(index, name)] = INT
                continue
            value_type = child.variables.get(name)
            if value_type is None:
                self._diag(
                    "UnboundVariable",
                    f"aggregate variable {name} is not bound by the "
                    "aggregate body",
                    term.location,
                    rule,
                )
            elif not is_numeric(value_type):
                self._diag(
                    "TypeMismatch",
                    f"{accumulator.operation.value} needs a numeric "
                    f"variable, {name} has type {value_type}",
                    term.location,
                    rule,
                )
            else:
                accumulator_types[(index, name)] = value_type

        self._sub_head(term.head1, child, rule)

        final = env.child()
        for name in accumulators:
            final.variables[name] = accumulator_types.get((index, name), ANY)
        self._sub_head(term.head2, final, rule)
        return plan

    # axioms

    def _check_axioms(
        self,
    ) -> tuple[tuple[Fact, ...], tuple[FactTemplate, ...]]:
        axioms: list[Fact] = []
        universal: list[FactTemplate] = []
        empty = TypeEnv(predicates=self._predicates, constants=self._constants)
        environment = Environment(constants=self._constants)

        for axiom in self._program.axioms:
            template = axiom.fact
            decl = self._declaration(template, None, in_body=False)
            if decl is None:
                continue

            names = template_variables(template)
            if names:
                home = template.home
                rest = set()
                for arg in template.args[1:]:
                    rest |= expr_variables(arg)
                if isinstance(home, Var) and names == {home.name} and not rest:
                    for arg, arg_type in zip(
                        template.args[1:], decl.arg_types[1:]
                    ):
                        self._expect(
                            arg, arg_type, empty, None, "NonGroundAxiom"
                        )
                    universal.append(template)
                else:
                    self._diag(
                        "NonGroundAxiom",
                        f"axiom {format_template(template)} has free "
                        f"variables {', '.join(sorted(names))}",
                        template.location,
                    )
                continue

            count = len(self._diagnostics)
            for arg, arg_type in zip(template.args, decl.arg_types):
                if isinstance(arg, Wildcard):
                    self._diag(
                        "NonGroundAxiom",
                        f"axiom {format_template(template)} uses _",
                        template.location,
                    )
                else:
                    self._expect(arg, arg_type, empty, None, "NonGroundAxiom")
            if len(self._diagnostics) > count:
                continue

            try:
                values = tuple(
                    evaluate(arg, {}, environment) for arg in template.args
                )
            except ConstraintError as e:
                self._diag(
                    "TypeMismatch",
                    f"axiom {format_template(template)}: {e}",
                    template.location,
                )
                continue
            axioms.append(Fact(template.predicate, values, linear=decl.linear))

        return tuple(axioms), tuple(universal)


def check_program(
    program: Program, overrides: Optional[Mapping[str, Value]] = None
) -> TypedProgram:
    """
    Type check a program and resolve its constants

    Arguments:
        program: A parsed program
        overrides: Constant values given on the command line. They take
            precedence over ``const`` declarations and may define constants
            the program uses without declaring them.

    Returns:
        The checked program with ground axioms and match plans

    Raises:
        CheckError: With every diagnostic found, in source order per
            category
    """
    return Checker(program, overrides).check()


def compile_program(
    sources: Iterable[str], overrides: Optional[Mapping[str, Value]] = None
) -> TypedProgram:
    """
    Parse and check the concatenation of several source texts

    Generated axiom files are passed this way together with the program
    they belong to.
    """
    return check_program(parse("\n".join(sources)), overrides)
