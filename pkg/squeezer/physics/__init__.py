"""Numerical core: normal form, moment dynamics, squeezing metrics, setup design"""
