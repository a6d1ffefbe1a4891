import importlib

from nonlocal_transport import hooks


def get_attr(method_string):
	"""Resolve a dotted path such as ``package.module.function``"""
	module_name, attr_name = method_string.rsplit(".", 1)
	module = importlib.import_module(module_name)
	return getattr(module, attr_name)


def get_hooks(hook_name):
	"""Return a hook registry declared in hooks.py"""
	return getattr(hooks, hook_name, {}) or {}


def resolve_hook(hook_name, key):
	"""Resolve one named entry of a hook registry"""
	registry = get_hooks(hook_name)
	if key not in registry:
		raise KeyError(f"{key!r} is not registered in {hook_name} (known: {', '.join(sorted(registry))})")
	return get_attr(registry[key])
