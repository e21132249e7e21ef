"""Scenario files in, result artifacts out"""
