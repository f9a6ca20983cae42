# utils/state_machine.py

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Generic, List, Optional, Type, TypeVar, Union, cast, get_type_hints

StateSchema = TypeVar("StateSchema")

_run_ids = itertools.count(1)


class Step(Generic[StateSchema]):
    def __init__(self, step_id: str, logic: Callable[[StateSchema], Dict]):
        self.step_id = step_id
        self.logic = logic

    def __str__(self) -> str:
        return f"Step('{self.step_id}')"

    def __repr__(self) -> str:
        return self.__str__()

    def run(self, state: StateSchema, state_schema: Type[StateSchema]) -> StateSchema:
        result = self.logic(state) or {}
        expected_fields = get_type_hints(state_schema)
        # Only fields declared on the schema survive
        updated = {**state}
        for name, value in result.items():
            if name in expected_fields:
                updated[name] = value
        return cast(StateSchema, updated)


class EntryPoint(Step[StateSchema]):
    """Marks the beginning of the workflow; connect it to the first real step."""
    def __init__(self):
        super().__init__("__entry__", lambda x: {})


class Termination(Step[StateSchema]):
    """Marks the end of the workflow; connect the final step(s) to it."""
    def __init__(self):
        super().__init__("__termination__", lambda x: {})


@dataclass
class Transition(Generic[StateSchema]):
    source: str
    targets: List[str]
    condition: Optional[Callable[[StateSchema], Union[str, Step, List[str]]]] = None

    def __str__(self) -> str:
        return f"Transition('{self.source}' -> {self.targets})"

    def resolve(self, state: StateSchema) -> List[str]:
        if self.condition is None:
            return self.targets
        result = self.condition(state)
        if isinstance(result, Step):
            return [result.step_id]
        if isinstance(result, str):
            return [result]
        return [r.step_id if isinstance(r, Step) else r for r in result]


@dataclass
class Snapshot(Generic[StateSchema]):
    """State after one step; index is the position in the run."""
    index: int
    step_id: str
    state_data: StateSchema
    seconds: float

    def __str__(self) -> str:
        return f"Snapshot({self.index}: {self.step_id}, {self.seconds:.3f}s)"


@dataclass
class Run(Generic[StateSchema]):
    run_id: str
    snapshots: List[Snapshot[StateSchema]] = field(default_factory=list)
    completed: bool = False

    def __str__(self) -> str:
        return f"Run('{self.run_id}')"

    @classmethod
    def create(cls) -> "Run[StateSchema]":
        return cls(run_id=f"run-{next(_run_ids)}")

    @property
    def metadata(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "steps": [s.step_id for s in self.snapshots],
            "seconds": sum(s.seconds for s in self.snapshots),
        }

    def add_snapshot(self, snapshot: Snapshot[StateSchema]):
        self.snapshots.append(snapshot)

    def complete(self):
        self.completed = True

    def step_ids(self) -> List[str]:
        return [s.step_id for s in self.snapshots]

    def get_final_state(self) -> Optional[StateSchema]:
        if not self.snapshots:
            return None
        return self.snapshots[-1].state_data


class StateMachine(Generic[StateSchema]):
    def __init__(self, state_schema: Type[StateSchema], logger: Optional[logging.Logger] = None):
        self.state_schema = state_schema
        self.steps: Dict[str, Step[StateSchema]] = {}
        self.transitions: Dict[str, List[Transition[StateSchema]]] = {}
        self.logger = logger or logging.getLogger("confdim.state_machine")

    def __str__(self) -> str:
        return f"StateMachine(schema={list(get_type_hints(self.state_schema))})"

    def add_steps(self, steps: List[Step[StateSchema]]):
        for step in steps:
            self.steps[step.step_id] = step

    def connect(self, source: Union[Step[StateSchema], str],
                targets: Union[Step[StateSchema], str, List[Union[Step[StateSchema], str]]],
                condition: Optional[Callable[[StateSchema], Union[str, Step, List[str]]]] = None):
        src_id = source.step_id if isinstance(source, Step) else source
        target_list = targets if isinstance(targets, list) else [targets]
        target_ids = [t.step_id if isinstance(t, Step) else t for t in target_list]
        self.transitions.setdefault(src_id, []).append(
            Transition[StateSchema](source=src_id, targets=target_ids, condition=condition))

    def run(self, state: StateSchema) -> Run[StateSchema]:
        expected_fields = get_type_hints(self.state_schema)
        if not set(state.keys()) & set(expected_fields):
            raise ValueError(f"initial state shares no field with the schema {list(expected_fields)}")

        entry_points = [s for s in self.steps.values() if isinstance(s, EntryPoint)]
        if len(entry_points) != 1:
            raise ValueError(f"workflow needs exactly one EntryPoint, found {len(entry_points)}")

        current_run = Run.create()
        current_step_id = entry_points[0].step_id
        while current_step_id:
            step = self.steps[current_step_id]
            if isinstance(step, Termination):
                self.logger.debug(f"[StateMachine] Terminating: {current_step_id}")
                break

            started = time.perf_counter()
            state = step.run(state, self.state_schema)
            elapsed = time.perf_counter() - started
            self.logger.debug(f"[StateMachine] Executed step: {current_step_id} ({elapsed:.3f}s)")
            # shallow copy: sweeps and graphs are never mutated once stored
            current_run.add_snapshot(Snapshot(len(current_run.snapshots), current_step_id, dict(state), elapsed))

            next_steps: List[str] = []
            for t in self.transitions.get(current_step_id, []):
                next_steps += t.resolve(state)
            if not next_steps:
                raise ValueError(f"[StateMachine] No transitions found from step: {current_step_id}")
            if len(next_steps) > 1:
                raise NotImplementedError("Parallel execution not implemented yet.")
            current_step_id = next_steps[0]

        current_run.complete()
        return current_run
