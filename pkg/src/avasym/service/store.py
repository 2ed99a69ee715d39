"""File-backed project store with per-project write serialization.

One ``<project_id>.xa11y.json`` per project, written atomically after every
mutation; reads outside a mutation see the last committed snapshot.
"""

from __future__ import annotations

import os
import threading
from contextlib import contextmanager

from ..errors import UnknownProject
from ..project import PROJECT_FILE_SUFFIX, Project, load_project, save_project


class ProjectStore:
    def __init__(self, root: str):
        self.root = os.path.abspath(root)
        os.makedirs(self.root, exist_ok=True)
        self._projects: dict[str, Project] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _path(self, project_id: str) -> str:
        return os.path.join(self.root, project_id + PROJECT_FILE_SUFFIX)

    def _lock(self, project_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(project_id, threading.Lock())

    def list_ids(self) -> list[str]:
        ids = set(self._projects)
        for name in os.listdir(self.root):
            if name.endswith(PROJECT_FILE_SUFFIX):
                ids.add(name[: -len(PROJECT_FILE_SUFFIX)])
        return sorted(ids)

    def get(self, project_id: str) -> Project:
        if project_id in self._projects:
            return self._projects[project_id]
        path = self._path(project_id)
        if not os.path.exists(path):
            raise UnknownProject(project_id)
        project = load_project(path)
        self._projects[project_id] = project
        return project

    def put(self, project: Project):
        with self._lock(project.project_id):
            self._projects[project.project_id] = project
            save_project(project, self._path(project.project_id))

    @contextmanager
    def mutate(self, project_id: str):
        """Serialize mutations per project and persist on success."""
        lock = self._lock(project_id)
        with lock:
            project = self.get(project_id)
            yield project
            save_project(project, self._path(project_id))
