"""Test suite for the skybridge coverage and cabin simulators"""
