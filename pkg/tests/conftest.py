import hypothesis

hypothesis.settings.register_profile("fqcover", max_examples=40, deadline=None)
hypothesis.settings.load_profile("fqcover")
